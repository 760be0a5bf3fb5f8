/** Minimal parser for the engine's metric CSV (timestamp + numeric columns). */

export interface ParsedFrame {
  timestamps: number[];
  columns: Record<string, number[]>;
}

export function parseMetricsCsv(text: string): ParsedFrame {
  const lines = text.split("\n").filter((l) => l.trim() !== "");
  if (lines.length < 2) throw new Error("metric CSV needs a header and at least one row");
  const header = lines[0].split(",").map((h) => h.trim());
  if (header[0] !== "timestamp") throw new Error("first column must be 'timestamp'");
  const names = header.slice(1);
  const timestamps: number[] = [];
  const columns: Record<string, number[]> = Object.fromEntries(names.map((n) => [n, []]));
  for (const line of lines.slice(1)) {
    const cells = line.split(",");
    timestamps.push(Number(cells[0]));
    names.forEach((name, i) => columns[name].push(Number(cells[i + 1])));
  }
  return { timestamps, columns };
}
