/**
 * Deterministic SVG chart primitives: stacked line panels and grouped bars.
 *
 * No timestamps, no randomness, fixed number formatting (two decimals for
 * all geometry), so identical inputs always produce identical bytes.
 */

export const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#ff7f0e",
  "#9467bd",
  "#8c564b",
  "#17becf",
  "#7f7f7f",
];

export function colorFor(label: string, ordered: string[]): string {
  const idx = ordered.indexOf(label);
  return PALETTE[(idx >= 0 ? idx : ordered.length) % PALETTE.length];
}

export interface Point {
  x: number;
  y: number;
}

export interface Series {
  label: string;
  color: string;
  points: Point[];
}

export interface LinePanel {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
}

export interface Bar {
  label: string;
  color: string;
  value: number;
}

export interface BarPanel {
  title: string;
  yLabel: string;
  groups: Array<{ label: string; bars: Bar[] }>;
}

const WIDTH = 820;
const PLOT_LEFT = 64;
const PLOT_RIGHT = 640;
const PANEL_HEIGHT = 230;
const PLOT_TOP_PAD = 38;
const PLOT_BOTTOM_PAD = 36;
const FONT = "font-family=\"Helvetica, Arial, sans-serif\"";

const n2 = (v: number): string => v.toFixed(2);

function escapeText(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

interface Scale {
  lo: number;
  hi: number;
  map: (v: number) => number;
}

function makeScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  if (!(hi > lo)) {
    lo -= 1;
    hi += 1;
  }
  const span = hi - lo;
  return {
    lo,
    hi,
    map: (v: number) => outLo + ((v - lo) / span) * (outHi - outLo),
  };
}

function ticks(scale: Scale, count: number): number[] {
  const out: number[] = [];
  for (let i = 0; i <= count; i += 1) {
    out.push(scale.lo + ((scale.hi - scale.lo) * i) / count);
  }
  return out;
}

function legend(entries: Array<{ label: string; color: string }>, top: number): string {
  const parts: string[] = [];
  entries.forEach((entry, i) => {
    const y = top + i * 18;
    parts.push(
      `<rect x="${n2(PLOT_RIGHT + 16)}" y="${n2(y - 9)}" width="12" height="12" fill="${entry.color}"/>`,
      `<text x="${n2(PLOT_RIGHT + 34)}" y="${n2(y + 2)}" font-size="12" ${FONT}>${escapeText(entry.label)}</text>`,
    );
  });
  return parts.join("\n");
}

function panelFrame(title: string, yLabel: string, top: number, yScale: Scale): string {
  const bottom = top + PANEL_HEIGHT - PLOT_BOTTOM_PAD;
  const plotTop = top + PLOT_TOP_PAD;
  const parts = [
    `<text x="${n2(PLOT_LEFT)}" y="${n2(top + 18)}" font-size="14" font-weight="bold" ${FONT}>${escapeText(title)}</text>`,
    `<line x1="${n2(PLOT_LEFT)}" y1="${n2(bottom)}" x2="${n2(PLOT_RIGHT)}" y2="${n2(bottom)}" stroke="#333" stroke-width="1"/>`,
    `<line x1="${n2(PLOT_LEFT)}" y1="${n2(plotTop)}" x2="${n2(PLOT_LEFT)}" y2="${n2(bottom)}" stroke="#333" stroke-width="1"/>`,
    `<text x="14" y="${n2((plotTop + bottom) / 2)}" font-size="11" ${FONT} transform="rotate(-90 14 ${n2((plotTop + bottom) / 2)})" text-anchor="middle">${escapeText(yLabel)}</text>`,
  ];
  for (const tick of ticks(yScale, 4)) {
    const y = yScale.map(tick);
    parts.push(
      `<line x1="${n2(PLOT_LEFT - 4)}" y1="${n2(y)}" x2="${n2(PLOT_LEFT)}" y2="${n2(y)}" stroke="#333" stroke-width="1"/>`,
      `<text x="${n2(PLOT_LEFT - 8)}" y="${n2(y + 4)}" font-size="10" text-anchor="end" ${FONT}>${n2(tick)}</text>`,
      `<line x1="${n2(PLOT_LEFT)}" y1="${n2(y)}" x2="${n2(PLOT_RIGHT)}" y2="${n2(y)}" stroke="#eee" stroke-width="1"/>`,
    );
  }
  return parts.join("\n");
}

function document(body: string, height: number): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${height}" viewBox="0 0 ${WIDTH} ${height}">`,
    `<rect x="0" y="0" width="${WIDTH}" height="${height}" fill="#ffffff"/>`,
    body,
    "</svg>",
    "",
  ].join("\n");
}

export function renderLinePanels(panels: LinePanel[]): string {
  const parts: string[] = [];
  panels.forEach((panel, index) => {
    const top = index * PANEL_HEIGHT;
    const plotTop = top + PLOT_TOP_PAD;
    const bottom = top + PANEL_HEIGHT - PLOT_BOTTOM_PAD;
    const xs = panel.series.flatMap((s) => s.points.map((p) => p.x));
    const ys = panel.series.flatMap((s) => s.points.map((p) => p.y));
    const xScale = makeScale(Math.min(...xs), Math.max(...xs), PLOT_LEFT, PLOT_RIGHT);
    const pad = (Math.max(...ys) - Math.min(...ys)) * 0.05;
    const yScale = makeScale(Math.min(...ys) - pad, Math.max(...ys) + pad, bottom, plotTop);
    parts.push(panelFrame(panel.title, panel.yLabel, top, yScale));
    parts.push(
      `<text x="${n2((PLOT_LEFT + PLOT_RIGHT) / 2)}" y="${n2(bottom + 26)}" font-size="11" text-anchor="middle" ${FONT}>${escapeText(panel.xLabel)}</text>`,
    );
    for (const series of panel.series) {
      const coords = series.points
        .map((p) => `${n2(xScale.map(p.x))},${n2(yScale.map(p.y))}`)
        .join(" ");
      parts.push(
        `<polyline fill="none" stroke="${series.color}" stroke-width="1.5" points="${coords}"/>`,
      );
    }
    parts.push(legend(panel.series, plotTop + 6));
  });
  return document(parts.join("\n"), panels.length * PANEL_HEIGHT);
}

export function renderBarPanels(panels: BarPanel[]): string {
  const parts: string[] = [];
  panels.forEach((panel, index) => {
    const top = index * PANEL_HEIGHT;
    const plotTop = top + PLOT_TOP_PAD;
    const bottom = top + PANEL_HEIGHT - PLOT_BOTTOM_PAD;
    const values = panel.groups.flatMap((g) => g.bars.map((b) => b.value));
    const yScale = makeScale(0, Math.max(...values, 0), bottom, plotTop);
    parts.push(panelFrame(panel.title, panel.yLabel, top, yScale));
    const groupWidth = (PLOT_RIGHT - PLOT_LEFT) / Math.max(panel.groups.length, 1);
    const seen: Array<{ label: string; color: string }> = [];
    panel.groups.forEach((group, gi) => {
      const x0 = PLOT_LEFT + gi * groupWidth;
      const barWidth = (groupWidth * 0.7) / Math.max(group.bars.length, 1);
      group.bars.forEach((bar, bi) => {
        const x = x0 + groupWidth * 0.15 + bi * barWidth;
        const yTop = yScale.map(Math.max(bar.value, 0));
        const height = bottom - yTop;
        parts.push(
          `<rect x="${n2(x)}" y="${n2(yTop)}" width="${n2(barWidth * 0.9)}" height="${n2(height)}" fill="${bar.color}"/>`,
        );
        if (!seen.some((e) => e.label === bar.label)) {
          seen.push({ label: bar.label, color: bar.color });
        }
      });
      parts.push(
        `<text x="${n2(x0 + groupWidth / 2)}" y="${n2(bottom + 16)}" font-size="10" text-anchor="middle" ${FONT}>${escapeText(group.label)}</text>`,
      );
    });
    parts.push(legend(seen, plotTop + 6));
  });
  return document(parts.join("\n"), panels.length * PANEL_HEIGHT);
}
