/**
 * Minimal deterministic SVG chart scenes: fixed canvas, fixed palette, no
 * timestamps, attributes emitted in insertion order so identical inputs
 * produce identical bytes.
 */

export const WIDTH = 640;
export const HEIGHT = 440;
export const MARGIN = { left: 64, right: 20, top: 36, bottom: 52 };

export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

export type Scale = (v: number) => number;

export function linearScale(
  domain: [number, number],
  range: [number, number],
): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  return (v) => r0 + ((v - d0) / span) * (r1 - r0);
}

export function log10Scale(
  domain: [number, number],
  range: [number, number],
): Scale {
  const inner = linearScale(
    [Math.log10(domain[0]), Math.log10(domain[1])],
    range,
  );
  return (v) => inner(Math.log10(v));
}

export function extent(values: number[], padFraction = 0.05): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (!Number.isFinite(v)) continue;
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!Number.isFinite(lo)) throw new Error("no finite values to scale");
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const pad = (hi - lo) * padFraction;
  return [lo - pad, hi + pad];
}

/** Extent padded multiplicatively, for log axes (positive values only). */
export function logExtent(values: number[], padFraction = 0.05): [number, number] {
  const [lo, hi] = extent(
    values.filter((v) => v > 0).map(Math.log10),
    padFraction,
  );
  return [Math.pow(10, lo), Math.pow(10, hi)];
}

/** Round ticks at a 1/2/5 step covering the domain. */
export function linearTicks([lo, hi]: [number, number], count = 6): number[] {
  const span = hi - lo;
  const raw = span / Math.max(count - 1, 1);
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => span / s <= count)!;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + 1e-12 * span; v += step) {
    ticks.push(Number(v.toPrecision(12)));
  }
  return ticks;
}

export function decadeTicks([lo, hi]: [number, number]): number[] {
  const ticks: number[] = [];
  for (
    let e = Math.ceil(Math.log10(lo) - 1e-9);
    e <= Math.floor(Math.log10(hi) + 1e-9);
    e++
  ) {
    ticks.push(Math.pow(10, e));
  }
  return ticks.length >= 2 ? ticks : [lo, hi];
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(0);
  return String(Number(v.toPrecision(6)));
}

export interface Series {
  label: string;
  x: number[];
  y: number[];
  color?: string;
  line?: boolean;
  points?: boolean;
  dashed?: boolean;
}

export interface SceneOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  xLog?: boolean;
  yLog?: boolean;
  xLim?: [number, number];
  yLim?: [number, number];
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderScene(series: Series[], opts: SceneOptions): string {
  const xs = series.flatMap((s) => s.x);
  const ys = series.flatMap((s) => s.y);
  const xDom = opts.xLim ?? (opts.xLog ? logExtent(xs) : extent(xs));
  const yDom = opts.yLim ?? (opts.yLog ? logExtent(ys) : extent(ys));
  const xr: [number, number] = [MARGIN.left, WIDTH - MARGIN.right];
  const yr: [number, number] = [HEIGHT - MARGIN.bottom, MARGIN.top];
  const sx = opts.xLog ? log10Scale(xDom, xr) : linearScale(xDom, xr);
  const sy = opts.yLog ? log10Scale(yDom, yr) : linearScale(yDom, yr);
  const xTicks = opts.xLog ? decadeTicks(xDom) : linearTicks(xDom);
  const yTicks = opts.yLog ? decadeTicks(yDom) : linearTicks(yDom);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" ` +
      `height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" ` +
      `font-family="Helvetica, Arial, sans-serif">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="22" text-anchor="middle" font-size="15">` +
      `${esc(opts.title)}</text>`,
  );

  for (const t of xTicks) {
    const px = sx(t).toFixed(2);
    parts.push(
      `<line x1="${px}" y1="${yr[0]}" x2="${px}" y2="${yr[1]}" ` +
        `stroke="#dddddd" stroke-width="1"/>`,
      `<text x="${px}" y="${yr[0] + 18}" text-anchor="middle" ` +
        `font-size="11">${fmt(t)}</text>`,
    );
  }
  for (const t of yTicks) {
    const py = sy(t).toFixed(2);
    parts.push(
      `<line x1="${xr[0]}" y1="${py}" x2="${xr[1]}" y2="${py}" ` +
        `stroke="#dddddd" stroke-width="1"/>`,
      `<text x="${xr[0] - 6}" y="${py}" text-anchor="end" ` +
        `dominant-baseline="middle" font-size="11">${fmt(t)}</text>`,
    );
  }
  parts.push(
    `<line x1="${xr[0]}" y1="${yr[0]}" x2="${xr[1]}" y2="${yr[0]}" ` +
      `stroke="#000000" stroke-width="1"/>`,
    `<line x1="${xr[0]}" y1="${yr[0]}" x2="${xr[0]}" y2="${yr[1]}" ` +
      `stroke="#000000" stroke-width="1"/>`,
    `<text x="${(xr[0] + xr[1]) / 2}" y="${HEIGHT - 12}" ` +
      `text-anchor="middle" font-size="13">${esc(opts.xLabel)}</text>`,
    `<text x="18" y="${(yr[0] + yr[1]) / 2}" text-anchor="middle" ` +
      `font-size="13" transform="rotate(-90 18 ${(yr[0] + yr[1]) / 2})">` +
      `${esc(opts.yLabel)}</text>`,
  );

  series.forEach((s, i) => {
    const color = s.color ?? PALETTE[i % PALETTE.length];
    const pts = s.x
      .map((x, j) => [sx(x), sy(s.y[j])] as const)
      .filter(([px, py]) => Number.isFinite(px) && Number.isFinite(py));
    if (s.line !== false && pts.length > 1) {
      const d = pts.map(([px, py]) => `${px.toFixed(2)},${py.toFixed(2)}`)
        .join(" ");
      const dash = s.dashed ? ` stroke-dasharray="6 4"` : "";
      parts.push(
        `<polyline points="${d}" fill="none" stroke="${color}" ` +
          `stroke-width="1.8"${dash}/>`,
      );
    }
    if (s.points) {
      for (const [px, py] of pts) {
        parts.push(
          `<circle cx="${px.toFixed(2)}" cy="${py.toFixed(2)}" r="3" ` +
            `fill="${color}"/>`,
        );
      }
    }
    parts.push(
      `<rect x="${xr[1] - 150}" y="${MARGIN.top + 18 * i}" width="12" ` +
        `height="3" fill="${color}"/>`,
      `<text x="${xr[1] - 132}" y="${MARGIN.top + 18 * i + 4}" ` +
        `font-size="11">${esc(s.label)}</text>`,
    );
  });
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
