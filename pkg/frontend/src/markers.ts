import { Reference } from "./api.js";

export type BodySegment =
  | { type: "text"; text: string }
  | { type: "marker"; marker: number; reference: Reference | null };

const MARKER = /\[(\d+)\]/g;

/**
 * Split a report body into text and [n] marker segments, resolving each
 * marker against the reference list. Markers with no matching reference
 * come back with reference null so the view can flag them as dangling.
 */
export function segmentBody(body: string, references: Reference[]): BodySegment[] {
  const byMarker = new Map(references.map((ref) => [ref.marker, ref]));
  const segments: BodySegment[] = [];
  let cursor = 0;
  for (const match of body.matchAll(MARKER)) {
    const index = match.index ?? 0;
    if (index > cursor) {
      segments.push({ type: "text", text: body.slice(cursor, index) });
    }
    const marker = Number(match[1]);
    segments.push({ type: "marker", marker, reference: byMarker.get(marker) ?? null });
    cursor = index + match[0].length;
  }
  if (cursor < body.length) {
    segments.push({ type: "text", text: body.slice(cursor) });
  }
  return segments;
}

export function danglingMarkers(segments: BodySegment[]): number[] {
  return segments
    .filter((s): s is Extract<BodySegment, { type: "marker" }> => s.type === "marker" && s.reference === null)
    .map((s) => s.marker);
}
