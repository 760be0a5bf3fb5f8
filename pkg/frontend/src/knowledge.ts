/** The editable expert-knowledge draft and its YAML serialization.
 *
 * Drafts are immutable values: every edit returns a new draft, which is
 * what makes the undo stack in the session trivial.
 */

export interface KnowledgeDraft {
  forbids: [string, string][];
  requires: [string, string][];
  rootNodes: string[];
  leafNodes: string[];
}

export type EdgeConstraint = "none" | "forbidden" | "required";
export type NodeConstraint = "none" | "root" | "leaf";

export function emptyDraft(): KnowledgeDraft {
  return { forbids: [], requires: [], rootNodes: [], leafNodes: [] };
}

function samePair(p: [string, string], a: string, b: string): boolean {
  return p[0] === a && p[1] === b;
}

export function edgeConstraint(draft: KnowledgeDraft, a: string, b: string): EdgeConstraint {
  if (draft.forbids.some((p) => samePair(p, a, b))) return "forbidden";
  if (draft.requires.some((p) => samePair(p, a, b))) return "required";
  return "none";
}

export function nodeConstraint(draft: KnowledgeDraft, v: string): NodeConstraint {
  if (draft.rootNodes.includes(v)) return "root";
  if (draft.leafNodes.includes(v)) return "leaf";
  return "none";
}

/** Click gesture on an edge: none -> forbidden -> required -> none. */
export function cycleEdge(draft: KnowledgeDraft, a: string, b: string): KnowledgeDraft {
  const state = edgeConstraint(draft, a, b);
  const forbids = draft.forbids.filter((p) => !samePair(p, a, b));
  const requires = draft.requires.filter((p) => !samePair(p, a, b));
  if (state === "none") forbids.push([a, b]);
  else if (state === "forbidden") requires.push([a, b]);
  return { ...draft, forbids, requires };
}

/** Click gesture on a node: none -> root -> leaf -> none. */
export function cycleNode(draft: KnowledgeDraft, v: string): KnowledgeDraft {
  const state = nodeConstraint(draft, v);
  const rootNodes = draft.rootNodes.filter((n) => n !== v);
  const leafNodes = draft.leafNodes.filter((n) => n !== v);
  if (state === "none") rootNodes.push(v);
  else if (state === "root") leafNodes.push(v);
  return { ...draft, rootNodes, leafNodes };
}

function yamlName(name: string): string {
  return JSON.stringify(name); // double-quoted YAML scalar
}

function pairList(pairs: [string, string][]): string {
  if (pairs.length === 0) return " []\n";
  return (
    "\n" +
    pairs
      .map(([a, b]) => `  - [${yamlName(a)}, ${yamlName(b)}]\n`)
      .join("")
  );
}

function nameList(names: string[]): string {
  if (names.length === 0) return " []\n";
  return "\n" + names.map((n) => `  - ${yamlName(n)}\n`).join("");
}

/** Serialize to the knowledge-document schema the engine parses. */
export function toYaml(draft: KnowledgeDraft): string {
  return (
    "forbids:" + pairList(draft.forbids) +
    "requires:" + pairList(draft.requires) +
    "root-nodes:" + nameList(draft.rootNodes) +
    "leaf-nodes:" + nameList(draft.leafNodes)
  );
}

export function draftIsEmpty(draft: KnowledgeDraft): boolean {
  return (
    draft.forbids.length === 0 &&
    draft.requires.length === 0 &&
    draft.rootNodes.length === 0 &&
    draft.leafNodes.length === 0
  );
}
