// Canonical display formatting. Every number shown in the UI is a
// service-reported value passed through exactly one of these helpers,
// so tests can assert the displayed strings from raw responses.

export function formatCm(heightMm: number): string {
  return `${(heightMm / 10).toFixed(2)} cm`;
}

export function formatHeight(heightMm: number): string {
  return `${formatCm(heightMm)} (${heightMm.toFixed(3)} mm)`;
}

export function formatShift(shiftPx: number): string {
  return `snapped ${shiftPx.toFixed(1)} px`;
}

export function formatPoint(p: [number, number]): string {
  return `(${p[0].toFixed(1)}, ${p[1].toFixed(1)})`;
}
