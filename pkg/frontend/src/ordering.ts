/** Pure list-ordering helpers. The UI never mutates arrays in place. */

/**
 * Move the item at index `from` to index `to`, shifting everything between.
 * Out-of-bounds positions (or a no-op move) return the input order unchanged.
 */
export function move<T>(items: readonly T[], from: number, to: number): T[] {
  const n = items.length;
  if (from < 0 || from >= n || to < 0 || to >= n || from === to) {
    return [...items];
  }
  const out = [...items];
  const [item] = out.splice(from, 1);
  out.splice(to, 0, item as T);
  return out;
}

/** True when `ordering` holds exactly the same strings as `served`, each once. */
export function isPermutationOf(ordering: readonly string[], served: readonly string[]): boolean {
  if (ordering.length !== served.length) return false;
  const counts = new Map<string, number>();
  for (const s of served) counts.set(s, (counts.get(s) ?? 0) + 1);
  for (const o of ordering) {
    const c = counts.get(o);
    if (!c) return false;
    counts.set(o, c - 1);
  }
  return true;
}

/** Small deterministic hash so a shuffle can be stable per (judge, gap). */
export function hashSeed(text: string): number {
  let h = 2166136261;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 16777619);
  }
  return h >>> 0;
}

/** Fisher-Yates with a seeded xorshift generator; input is not mutated. */
export function seededShuffle<T>(items: readonly T[], seed: number): T[] {
  const out = [...items];
  let state = seed || 1;
  const next = () => {
    state ^= state << 13;
    state ^= state >>> 17;
    state ^= state << 5;
    state >>>= 0;
    return state / 0x100000000;
  };
  for (let i = out.length - 1; i > 0; i--) {
    const j = Math.floor(next() * (i + 1));
    [out[i], out[j]] = [out[j] as T, out[i] as T];
  }
  return out;
}
