import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { debounce } from "../src/debounce";

describe("debounce", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("collapses a burst into one trailing call with the last args", () => {
    const calls: number[] = [];
    const fn = debounce((eta: number) => calls.push(eta), 80);
    fn(0.1);
    vi.advanceTimersByTime(40);
    fn(0.2);
    vi.advanceTimersByTime(40);
    fn(0.3);
    expect(calls).toEqual([]);
    vi.advanceTimersByTime(80);
    expect(calls).toEqual([0.3]);
  });

  it("fires again for a later burst", () => {
    const calls: number[] = [];
    const fn = debounce((eta: number) => calls.push(eta), 80);
    fn(1);
    vi.advanceTimersByTime(80);
    fn(2);
    vi.advanceTimersByTime(80);
    expect(calls).toEqual([1, 2]);
  });

  it("cancel drops the pending call", () => {
    const calls: number[] = [];
    const fn = debounce((eta: number) => calls.push(eta), 80);
    fn(1);
    fn.cancel();
    vi.advanceTimersByTime(200);
    expect(calls).toEqual([]);
  });

  it("flush runs the pending call immediately", () => {
    const calls: number[] = [];
    const fn = debounce((eta: number) => calls.push(eta), 80);
    fn(7);
    fn.flush();
    expect(calls).toEqual([7]);
    vi.advanceTimersByTime(200);
    expect(calls).toEqual([7]);
  });
});
