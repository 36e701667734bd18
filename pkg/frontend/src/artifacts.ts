/** Artifact filename grammar shared with the service. */
export const ARTIFACT_NAME_RE = /FILE-[A-Za-z0-9_.:-]+\.(?:png|svg|csv)/g;

const EXACT_RE = /^FILE-[A-Za-z0-9_.:-]+\.(?:png|svg|csv)$/;

export function isArtifactName(text: string): boolean {
  return EXACT_RE.test(text);
}

/** Every artifact filename mentioned in a piece of agent output. */
export function extractArtifactNames(text: string): string[] {
  const seen = new Set<string>();
  for (const match of text.matchAll(ARTIFACT_NAME_RE)) {
    seen.add(match[0]);
  }
  return [...seen];
}

export function isImageArtifact(name: string): boolean {
  return name.endsWith(".png") || name.endsWith(".svg");
}

export function artifactUrl(baseUrl: string, name: string): string {
  return `${baseUrl.replace(/\/+$/, "")}/v1/artifacts/${encodeURIComponent(name)}`;
}
