import type { UiSettings } from "./types.js";

export const DEFAULT_SETTINGS: UiSettings = {
  serviceBaseUrl: "http://127.0.0.1:8080",
  backendId: "golden",
  memoryEnabled: false,
  theme: "dark",
};

export function validateBaseUrl(raw: string): string {
  const url = new URL(raw); // throws on garbage before any request goes out
  if (url.protocol !== "http:" && url.protocol !== "https:") {
    throw new Error(`unsupported protocol ${url.protocol}`);
  }
  return url.toString().replace(/\/+$/, "");
}

/** Settings come from defaults, then URL query parameters. */
export function settingsFromParams(
  params: URLSearchParams,
  defaults: UiSettings = DEFAULT_SETTINGS,
): UiSettings {
  const settings: UiSettings = { ...defaults };
  const service = params.get("service");
  if (service) settings.serviceBaseUrl = validateBaseUrl(service);
  const backend = params.get("backend");
  if (backend) settings.backendId = backend;
  const memory = params.get("memory");
  if (memory) settings.memoryEnabled = memory === "on";
  const theme = params.get("theme");
  if (theme === "light" || theme === "dark") settings.theme = theme;
  return settings;
}
