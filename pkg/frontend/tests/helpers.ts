// Replay recorded API exchanges through the injectable fetch.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import type { FetchLike } from "../src/api.js";

export interface Exchange {
  method: string;
  path: string;
  body: unknown | null;
  status: number;
  response: string;
}

export function loadExchanges(): Exchange[] {
  const here = dirname(fileURLToPath(import.meta.url));
  const raw = readFileSync(join(here, "fixtures", "exchanges.json"), "utf8");
  return JSON.parse(raw) as Exchange[];
}

function deepEqual(a: unknown, b: unknown): boolean {
  if (a === b) return true;
  if (typeof a !== typeof b || a === null || b === null) return false;
  if (Array.isArray(a) !== Array.isArray(b)) return false;
  if (typeof a !== "object") return false;
  const ka = Object.keys(a as object).sort();
  const kb = Object.keys(b as object).sort();
  if (ka.join() !== kb.join()) return false;
  return ka.every((k) =>
    deepEqual((a as Record<string, unknown>)[k], (b as Record<string, unknown>)[k]),
  );
}

export function findExchange(
  exchanges: Exchange[],
  method: string,
  path: string,
  body: unknown | null,
): Exchange | undefined {
  return exchanges.find(
    (e) => e.method === method && e.path === path && deepEqual(e.body, body),
  );
}

/** Fetch fake that serves recorded exchanges and rejects anything else. */
export function fakeFetch(exchanges: Exchange[]): FetchLike {
  return async (url, init) => {
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(init.body) : null;
    const hit = findExchange(exchanges, method, url, body);
    if (!hit) {
      const near = exchanges
        .filter((e) => e.method === method && e.path === url)
        .map((e) => JSON.stringify(e.body));
      throw new Error(
        `no recorded exchange for ${method} ${url} body=${init?.body ?? "null"}` +
          (near.length ? `; recorded bodies: ${near.join(" | ")}` : ""),
      );
    }
    return {
      ok: hit.status < 400,
      status: hit.status,
      text: async () => hit.response,
    };
  };
}
