/** Display formatting only — values always come from service responses. */

export function eur(value: number): string {
  return `${value.toFixed(2)} EUR`;
}

export function num(value: number, digits = 1): string {
  return value.toFixed(digits);
}

export function grams(value: number): string {
  return value >= 1000 ? `${(value / 1000).toFixed(2)} kg` : `${value.toFixed(0)} g`;
}

export function watts(value: number): string {
  return value >= 1000 ? `${(value / 1000).toFixed(1)} kW` : `${value.toFixed(0)} W`;
}

/** "2025-10-11T06:00:00Z" -> "06:00" (UTC clock time for axis ticks). */
export function clock(iso: string): string {
  return iso.slice(11, 16);
}
