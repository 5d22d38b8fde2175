/** Small series utilities used by the renderer and the periodicity checks. */

export interface Extremum {
  index: number;
  value: number;
}

/** Strict interior local maxima of a series. */
export function localMaxima(values: number[]): Extremum[] {
  const out: Extremum[] = [];
  for (let i = 1; i < values.length - 1; i++) {
    if (values[i] > values[i - 1] && values[i] > values[i + 1]) {
      out.push({ index: i, value: values[i] });
    }
  }
  return out;
}

/**
 * Local maxima in the tail window whose height is comparable to the tallest
 * one (within the given ratio). Three or more of these is the periodicity
 * proxy used by the tests.
 */
export function comparableTailMaxima(
  values: number[],
  windowFraction = 0.2,
  heightRatio = 0.8,
): Extremum[] {
  const start = Math.floor(values.length * (1 - windowFraction));
  const tail = values.slice(start);
  const maxima = localMaxima(tail);
  if (maxima.length === 0) {
    return [];
  }
  const tallest = Math.max(...maxima.map((m) => m.value));
  return maxima
    .filter((m) => m.value >= heightRatio * tallest)
    .map((m) => ({ index: m.index + start, value: m.value }));
}

/** Evenly strided downsample keeping first and last points. */
export function downsample<T>(values: T[], maxPoints: number): T[] {
  if (values.length <= maxPoints) {
    return values;
  }
  const stride = Math.ceil(values.length / maxPoints);
  const out: T[] = [];
  for (let i = 0; i < values.length; i += stride) {
    out.push(values[i]);
  }
  if (out[out.length - 1] !== values[values.length - 1]) {
    out.push(values[values.length - 1]);
  }
  return out;
}
