/**
 * Command line: render one kfwave artifact to a static SVG.
 *
 *   node dist/render.js --in spectrum.csv --out spectrum.svg \
 *       --kind spectrum_loglog [--ref-slope 2.585] [--title ...]
 *
 * Exit codes: 0 success, 2 bad arguments or schema mismatch.
 */

import { writeFileSync } from "fs";

import { SchemaError } from "./csv.js";
import { PlotKind, PlotSpec, render } from "./plots.js";

const KINDS: PlotKind[] = [
  "exponent_curves",
  "spectrum_loglog",
  "moment_growth",
  "hoelder_regression",
];

function parseArgs(argv: string[]): PlotSpec {
  const opts = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (!key.startsWith("--") || value === undefined) {
      throw new Error(`malformed arguments near ${key}`);
    }
    opts.set(key.slice(2), value);
  }
  const input = opts.get("in");
  const output = opts.get("out");
  const kind = opts.get("kind") as PlotKind | undefined;
  if (!input || !output || !kind) {
    throw new Error("required: --in <file> --out <file> --kind <kind>");
  }
  if (!KINDS.includes(kind)) {
    throw new Error(`--kind must be one of ${KINDS.join(", ")}`);
  }
  const lim = (name: string): [number, number] | undefined => {
    const raw = opts.get(name);
    if (raw === undefined) return undefined;
    const parts = raw.split(",").map(Number);
    if (parts.length !== 2 || parts.some((v) => !Number.isFinite(v))) {
      throw new Error(`--${name} must be "lo,hi"`);
    }
    return [parts[0], parts[1]];
  };
  return {
    input,
    output,
    kind,
    title: opts.get("title"),
    xLabel: opts.get("xlabel"),
    yLabel: opts.get("ylabel"),
    xLim: lim("xlim"),
    yLim: lim("ylim"),
    refSlope: opts.has("ref-slope") ? Number(opts.get("ref-slope")) : undefined,
    column: opts.get("column"),
  };
}

export function main(argv: string[]): number {
  let spec: PlotSpec;
  try {
    spec = parseArgs(argv);
  } catch (err) {
    console.error(`usage error: ${(err as Error).message}`);
    return 2;
  }
  try {
    const svg = render(spec);
    writeFileSync(spec.output, svg);
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      return 2;
    }
    if ((err as NodeJS.ErrnoException).code === "ENOENT") {
      console.error(`input not found: ${spec.input}`);
      return 2;
    }
    throw err;
  }
  console.log(`wrote ${spec.output}`);
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
