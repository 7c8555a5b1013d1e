/**
 * The four figure kinds, each mapping a documented kfwave artifact schema to
 * an SVG scene. Theory curves are overlaid on empirical points whenever the
 * schema pins them down (1/(1 + d_H) for the natural-measure family,
 * 1/(1 - log(mu_min)/log 3) for the weighted middle-thirds family).
 */

import { readFileSync } from "fs";

import { readCsv, requireColumns, SchemaError, Table } from "./csv.js";
import { renderScene, Series } from "./svg.js";

export type PlotKind =
  | "exponent_curves"
  | "spectrum_loglog"
  | "moment_growth"
  | "hoelder_regression";

export interface PlotSpec {
  input: string;
  kind: PlotKind;
  output: string;
  title?: string;
  xLabel?: string;
  yLabel?: string;
  xLim?: [number, number];
  yLim?: [number, number];
  /** spectrum_loglog: reference slope; fitted from the data when omitted. */
  refSlope?: number;
  /** moment_growth: value column, defaults to m2 then var. */
  column?: string;
}

function fitSlope(logX: number[], logY: number[]): number {
  const n = logX.length;
  const mx = logX.reduce((a, b) => a + b, 0) / n;
  const my = logY.reduce((a, b) => a + b, 0) / n;
  let sxy = 0;
  let sxx = 0;
  for (let i = 0; i < n; i++) {
    sxy += (logX[i] - mx) * (logY[i] - my);
    sxx += (logX[i] - mx) * (logX[i] - mx);
  }
  return sxy / sxx;
}

function linspace(lo: number, hi: number, n: number): number[] {
  return Array.from({ length: n }, (_, i) => lo + ((hi - lo) * i) / (n - 1));
}

export function exponentCurves(table: Table, spec: PlotSpec): string {
  if (table.columns.has("d_h")) {
    const [dh, spatial, temporal] = requireColumns(table, [
      "d_h",
      "spatial",
      "temporal",
    ]);
    const grid = linspace(Math.min(...dh), Math.max(...dh), 101);
    const series: Series[] = [
      { label: "temporal (data)", x: dh, y: temporal, points: true,
        line: false, color: "#d62728" },
      { label: "1/(1+d_H)", x: grid, y: grid.map((d) => 1 / (1 + d)),
        dashed: true, color: "#d62728" },
      { label: "spatial (data)", x: dh, y: spatial, points: true,
        line: false, color: "#1f77b4" },
      { label: "1/2", x: grid, y: grid.map(() => 0.5), dashed: true,
        color: "#1f77b4" },
    ];
    return renderScene(series, {
      title: spec.title ?? "Essential Hölder exponents, natural measures",
      xLabel: spec.xLabel ?? "Hausdorff dimension d_H",
      yLabel: spec.yLabel ?? "exponent",
      xLim: spec.xLim,
      yLim: spec.yLim,
    });
  }
  const [mu, temporal] = requireColumns(table, ["mu_min", "temporal_exponent"]);
  const grid = linspace(Math.min(...mu), Math.max(...mu), 101);
  const series: Series[] = [
    { label: "temporal (data)", x: mu, y: temporal, points: true,
      line: false, color: "#d62728" },
    { label: "1/(1-log(mu)/log 3)", x: grid,
      y: grid.map((m) => 1 / (1 - Math.log(m) / Math.log(3))),
      dashed: true, color: "#d62728" },
  ];
  return renderScene(series, {
    title: spec.title ?? "Temporal Hölder exponent, weighted middle thirds",
    xLabel: spec.xLabel ?? "mu_min",
    yLabel: spec.yLabel ?? "exponent",
    xLim: spec.xLim,
    yLim: spec.yLim,
  });
}

export function spectrumLoglog(table: Table, spec: PlotSpec): string {
  const [k, lambda] = requireColumns(table, ["k", "lambda"]);
  const pts = k
    .map((kk, i) => [kk, lambda[i]] as const)
    .filter(([, l]) => l > 0);
  if (pts.length < 3) {
    throw new SchemaError("spectrum needs at least 3 positive eigenvalues");
  }
  const kx = pts.map(([kk]) => kk);
  const ly = pts.map(([, l]) => l);
  // Default fit avoids both ends: the first few modes and the tail of a
  // finite spectrum bend away from the k**(1/gamma) scaling regime.
  const lo = Math.floor(0.05 * kx.length);
  const hi = Math.max(Math.floor(0.6 * kx.length), lo + 3);
  const slope =
    spec.refSlope ??
    fitSlope(kx.slice(lo, hi).map(Math.log), ly.slice(lo, hi).map(Math.log));
  // Reference power law anchored at the geometric mid-point of the data.
  const mid = Math.floor(pts.length / 2);
  const anchorK = kx[mid];
  const anchorL = ly[mid];
  const refX = linspace(Math.log(kx[0]), Math.log(kx[kx.length - 1]), 50)
    .map(Math.exp);
  const refY = refX.map((x) => anchorL * Math.pow(x / anchorK, slope));
  const series: Series[] = [
    { label: "eigenvalues", x: kx, y: ly, points: true, line: false },
    { label: `slope ${slope.toFixed(3)}`, x: refX, y: refY, dashed: true,
      color: "#d62728" },
  ];
  return renderScene(series, {
    title: spec.title ?? "Eigenvalue scaling",
    xLabel: spec.xLabel ?? "k",
    yLabel: spec.yLabel ?? "lambda_k",
    xLog: true,
    yLog: true,
    xLim: spec.xLim,
    yLim: spec.yLim,
  });
}

export function momentGrowth(table: Table, spec: PlotSpec): string {
  const column =
    spec.column ?? (table.columns.has("m2") ? "m2" : "var");
  const [t, x, value] = requireColumns(table, ["t", "x", column]);
  const sites = [...new Set(x)].sort((a, b) => a - b);
  const series: Series[] = sites.map((site, i) => {
    const xs: number[] = [];
    const ys: number[] = [];
    t.forEach((tt, j) => {
      if (x[j] === site && value[j] > 0) {
        xs.push(tt);
        ys.push(Math.log(value[j]));
      }
    });
    return {
      label: `x = ${site.toPrecision(4)}`,
      x: xs,
      y: ys,
      points: true,
    };
  });
  if (series.every((s) => s.x.length === 0)) {
    throw new SchemaError(`no positive ${column} values to plot`);
  }
  return renderScene(series, {
    title: spec.title ?? `Moment growth (${column})`,
    xLabel: spec.xLabel ?? "t",
    yLabel: spec.yLabel ?? `log ${column}`,
    xLim: spec.xLim,
    yLim: spec.yLim,
  });
}

interface HoelderReportJson {
  direction: string;
  q: number;
  separations: number[];
  moments: number[];
  slope: number;
  slope_over_q: number;
  predicted: number | null;
}

export function hoelderRegression(jsonText: string, spec: PlotSpec): string {
  let report: Record<string, unknown>;
  try {
    report = JSON.parse(jsonText);
  } catch {
    throw new SchemaError("input is not valid JSON");
  }
  // Accept either a bare report or the CLI bundle holding one per direction.
  const candidates: HoelderReportJson[] = [];
  if (Array.isArray((report as { separations?: unknown }).separations)) {
    candidates.push(report as unknown as HoelderReportJson);
  } else {
    for (const key of ["spatial", "temporal"]) {
      const sub = report[key];
      if (sub && typeof sub === "object") {
        candidates.push(sub as HoelderReportJson);
      }
    }
  }
  if (candidates.length === 0) {
    throw new SchemaError(
      "missing columns: separations, moments",
      ["separations", "moments"],
    );
  }
  const series: Series[] = [];
  candidates.forEach((rep, i) => {
    const color = i === 0 ? "#1f77b4" : "#d62728";
    series.push({
      label: `${rep.direction} (slope/q ${rep.slope_over_q.toFixed(3)})`,
      x: rep.separations.map(Math.log),
      y: rep.moments.map(Math.log),
      points: true,
      line: false,
      color,
    });
    if (rep.predicted !== null && rep.predicted !== undefined) {
      const lx = rep.separations.map(Math.log);
      const ly = rep.moments.map(Math.log);
      const anchor = ly[0] - rep.predicted * rep.q * lx[0];
      series.push({
        label: `theory q*${rep.predicted.toFixed(3)}`,
        x: lx,
        y: lx.map((v) => anchor + rep.predicted! * rep.q * v),
        dashed: true,
        color,
      });
    }
  });
  return renderScene(series, {
    title: spec.title ?? "Hölder moment regression",
    xLabel: spec.xLabel ?? "log separation",
    yLabel: spec.yLabel ?? "log moment",
    xLim: spec.xLim,
    yLim: spec.yLim,
  });
}

export function render(spec: PlotSpec): string {
  switch (spec.kind) {
    case "exponent_curves":
      return exponentCurves(readCsv(spec.input), spec);
    case "spectrum_loglog":
      return spectrumLoglog(readCsv(spec.input), spec);
    case "moment_growth":
      return momentGrowth(readCsv(spec.input), spec);
    case "hoelder_regression":
      return hoelderRegression(readFileSync(spec.input, "utf8"), spec);
    default:
      throw new SchemaError(`unknown plot kind ${String(spec.kind)}`);
  }
}
