/** Quality filter inputs and their client-side validation. */

// Mirrors the characteristics the service accepts. The API stays the
// authority: anything it rejects surfaces as an error banner.
export const QUALITY_CHARACTERISTICS = [
  "completeness",
  "accuracy",
  "reliability",
  "timeliness",
  "consistency",
] as const;

export type ParsedRange = { min: number; max: number } | { error: string };

/**
 * Parse the two range inputs. A min above max is rejected here so no
 * request is sent for it; range bounds outside [0, 1] are left for the
 * API to judge.
 */
export function parseRange(minRaw: string, maxRaw: string): ParsedRange {
  if (minRaw.trim() === "" || maxRaw.trim() === "") {
    return { error: "enter both bounds" };
  }
  const min = Number(minRaw);
  const max = Number(maxRaw);
  if (Number.isNaN(min) || Number.isNaN(max)) {
    return { error: "bounds must be numbers" };
  }
  if (min > max) {
    return { error: "min must not exceed max" };
  }
  return { min, max };
}

export function isRangeError(parsed: ParsedRange): parsed is { error: string } {
  return "error" in parsed;
}
