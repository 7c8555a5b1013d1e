/**
 * Figure-reproduction gate for the rendering side: the exponent-curve CSVs
 * coming out of the computation package must match the closed forms, and
 * every kind must render deterministically.
 */

import { mkdtempSync, readFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { fileURLToPath } from "url";
import { describe, expect, test } from "vitest";

import { readCsv, requireColumns } from "../src/csv.js";
import { render } from "../src/plots.js";
import { main } from "../src/render.js";

const fixture = (name: string) =>
  fileURLToPath(new URL(`./fixtures/${name}`, import.meta.url));

describe("exponent curve values", () => {
  test("natural-measure family: temporal equals 1/(1 + d_H), spatial 1/2", () => {
    const [dh, spatial, temporal] = requireColumns(
      readCsv(fixture("fig1_exponents.csv")),
      ["d_h", "spatial", "temporal"],
    );
    dh.forEach((d, i) => {
      expect(spatial[i]).toBeCloseTo(0.5, 9);
      expect(temporal[i]).toBeCloseTo(1 / (1 + d), 9);
    });
    for (let i = 1; i < dh.length; i++) {
      expect(dh[i]).toBeGreaterThan(dh[i - 1]);
      expect(temporal[i]).toBeLessThan(temporal[i - 1]);
    }
  });

  test("weighted middle thirds: temporal equals 1/(1 - log(mu)/log 3)", () => {
    const [mu, temporal] = requireColumns(
      readCsv(fixture("fig2_cantor_weights.csv")),
      ["mu_min", "temporal_exponent"],
    );
    expect(mu.length).toBeGreaterThan(4);
    mu.forEach((m, i) => {
      expect(temporal[i]).toBeCloseTo(1 / (1 - Math.log(m) / Math.log(3)), 9);
      expect(m).toBeGreaterThan(0.18);
    });
  });
});

describe("rendering", () => {
  const kinds: Array<[string, string, Record<string, string>]> = [
    ["exponent_curves", "fig1_exponents.csv", {}],
    ["exponent_curves", "fig2_cantor_weights.csv", {}],
    ["spectrum_loglog", "spectrum.csv", {}],
    ["moment_growth", "ensemble.csv", {}],
    ["hoelder_regression", "hoelder.json", {}],
  ];

  test.each(kinds)("%s renders %s to SVG", (kind, input) => {
    const svg = render({
      kind: kind as never,
      input: fixture(input),
      output: "unused.svg",
    });
    expect(svg.startsWith("<svg")).toBe(true);
    expect(svg).toContain("<polyline");
    expect(svg).toContain("<circle");
    expect(svg.trimEnd().endsWith("</svg>")).toBe(true);
  });

  test("re-rendering is byte-identical", () => {
    const spec = {
      kind: "exponent_curves" as const,
      input: fixture("fig1_exponents.csv"),
      output: "unused.svg",
    };
    expect(render(spec)).toBe(render(spec));
  });

  test("fitted spectrum slope sits near the counting exponent", () => {
    const svg = render({
      kind: "spectrum_loglog",
      input: fixture("spectrum.csv"),
      output: "unused.svg",
    });
    const match = svg.match(/slope (\d+\.\d+)/);
    expect(match).not.toBeNull();
    const slope = Number(match![1]);
    const target = Math.log(6) / Math.log(2); // 1/gamma for the fixture
    expect(Math.abs(slope - target) / target).toBeLessThan(0.05);
  });

  test("explicit reference slope is honored", () => {
    const svg = render({
      kind: "spectrum_loglog",
      input: fixture("spectrum.csv"),
      output: "unused.svg",
      refSlope: 2.585,
    });
    expect(svg).toContain("slope 2.585");
  });

  test("hoelder regression overlays the theory slope", () => {
    const svg = render({
      kind: "hoelder_regression",
      input: fixture("hoelder.json"),
      output: "unused.svg",
    });
    expect(svg).toContain("space");
    expect(svg).toContain("time");
    expect(svg).toContain("theory");
  });
});

describe("command line", () => {
  test("writes the output file and returns 0", () => {
    const dir = mkdtempSync(join(tmpdir(), "kfwave-fig-"));
    const out = join(dir, "fig1.svg");
    const code = main([
      "--in", fixture("fig1_exponents.csv"),
      "--out", out,
      "--kind", "exponent_curves",
    ]);
    expect(code).toBe(0);
    expect(readFileSync(out, "utf8")).toContain("</svg>");
  });

  test("schema mismatch exits 2", () => {
    const dir = mkdtempSync(join(tmpdir(), "kfwave-fig-"));
    const code = main([
      "--in", fixture("ensemble.csv"),
      "--out", join(dir, "x.svg"),
      "--kind", "spectrum_loglog",
    ]);
    expect(code).toBe(2);
  });

  test("unknown kind exits 2", () => {
    const code = main([
      "--in", fixture("fig1_exponents.csv"),
      "--out", "x.svg",
      "--kind", "pie_chart",
    ]);
    expect(code).toBe(2);
  });

  test("missing input exits 2", () => {
    const code = main([
      "--in", "does-not-exist.csv",
      "--out", "x.svg",
      "--kind", "exponent_curves",
    ]);
    expect(code).toBe(2);
  });
});
