/** Deterministic layered graph layout.
 *
 * Layer = longest directed path from any source; nodes sort by name
 * inside a layer.  Rerunning discovery on the same data therefore renders
 * the same picture, which is what makes eyeballing diffs after a
 * constraint edit feasible.
 */

import type { GraphDoc } from "./types.js";

export interface NodePosition {
  x: number;
  y: number;
}

export interface LayoutResult {
  positions: Record<string, NodePosition>;
  width: number;
  height: number;
}

const COL_GAP = 150;
const ROW_GAP = 70;
const MARGIN = 50;

export function layeredLayout(graph: GraphDoc): LayoutResult {
  const parents = new Map<string, string[]>(graph.nodes.map((n) => [n, []]));
  for (const [a, b] of graph.directed) parents.get(b)?.push(a);

  const layer = new Map<string, number>();
  const visiting = new Set<string>();
  const layerOf = (v: string): number => {
    const known = layer.get(v);
    if (known !== undefined) return known;
    if (visiting.has(v)) return 0; // defensive: cycles flatten to layer 0
    visiting.add(v);
    const ps = parents.get(v) ?? [];
    const value = ps.length === 0 ? 0 : 1 + Math.max(...ps.map(layerOf));
    visiting.delete(v);
    layer.set(v, value);
    return value;
  };
  for (const v of graph.nodes) layerOf(v);

  const byLayer = new Map<number, string[]>();
  for (const v of [...graph.nodes].sort()) {
    const l = layer.get(v) ?? 0;
    if (!byLayer.has(l)) byLayer.set(l, []);
    (byLayer.get(l) as string[]).push(v);
  }

  const positions: Record<string, NodePosition> = {};
  let maxRows = 1;
  for (const [l, nodes] of byLayer) {
    maxRows = Math.max(maxRows, nodes.length);
    nodes.forEach((v, i) => {
      positions[v] = { x: MARGIN + l * COL_GAP, y: MARGIN + i * ROW_GAP };
    });
  }
  const layers = byLayer.size === 0 ? 1 : Math.max(...byLayer.keys()) + 1;
  return {
    positions,
    width: 2 * MARGIN + (layers - 1) * COL_GAP,
    height: 2 * MARGIN + (maxRows - 1) * ROW_GAP,
  };
}
