import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { debounce } from "../src/debounce.js";

describe("debounce", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("collapses a burst into one trailing call", () => {
    const calls: number[] = [];
    const d = debounce((x: number) => calls.push(x), 300);
    d(1);
    d(2);
    d(3);
    vi.advanceTimersByTime(299);
    expect(calls).toEqual([]);
    vi.advanceTimersByTime(1);
    expect(calls).toEqual([3]);
  });

  it("fires again after a quiet period", () => {
    const calls: number[] = [];
    const d = debounce((x: number) => calls.push(x), 100);
    d(1);
    vi.advanceTimersByTime(100);
    d(2);
    vi.advanceTimersByTime(100);
    expect(calls).toEqual([1, 2]);
  });

  it("cancel drops the pending call", () => {
    const calls: number[] = [];
    const d = debounce((x: number) => calls.push(x), 100);
    d(1);
    d.cancel();
    vi.advanceTimersByTime(500);
    expect(calls).toEqual([]);
    expect(d.pending()).toBe(false);
  });

  it("flush fires the pending call immediately", () => {
    const calls: number[] = [];
    const d = debounce((x: number) => calls.push(x), 100);
    d(7);
    d.flush();
    expect(calls).toEqual([7]);
    d.flush(); // nothing pending: no-op
    expect(calls).toEqual([7]);
  });
});
