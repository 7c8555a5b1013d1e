import { fileURLToPath } from "url";
import { describe, expect, test } from "vitest";

import { parseCsv, readCsv, requireColumns, SchemaError } from "../src/csv.js";

const fixture = (name: string) =>
  fileURLToPath(new URL(`./fixtures/${name}`, import.meta.url));

describe("csv reader", () => {
  test("parses metadata, header and numeric rows", () => {
    const table = readCsv(fixture("fig1_exponents.csv"));
    expect(table.meta.some((m) => m.startsWith("command figures"))).toBe(true);
    expect([...table.columns.keys()]).toEqual(["d_h", "spatial", "temporal"]);
    expect(table.rowCount).toBe(17);
  });

  test("reports every missing column at once", () => {
    const table = readCsv(fixture("fig1_exponents.csv"));
    try {
      requireColumns(table, ["d_h", "bogus_a", "bogus_b"]);
      expect.unreachable("should have thrown");
    } catch (err) {
      expect(err).toBeInstanceOf(SchemaError);
      expect((err as SchemaError).missing).toEqual(["bogus_a", "bogus_b"]);
    }
  });

  test("empty input is a schema error", () => {
    expect(() => parseCsv("")).toThrow(SchemaError);
    expect(() => parseCsv("# only meta\ncol_a,col_b\n")).toThrow(SchemaError);
  });

  test("ragged rows are rejected", () => {
    expect(() => parseCsv("a,b\n1,2\n3\n")).toThrow(SchemaError);
  });
});
