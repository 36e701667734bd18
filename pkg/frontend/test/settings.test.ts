import { describe, expect, it } from "vitest";

import { DEFAULT_SETTINGS, settingsFromParams, validateBaseUrl } from "../src/settings.js";

describe("settings", () => {
  it("applies URL parameters over defaults", () => {
    const params = new URLSearchParams(
      "service=http://host:9999&backend=live&memory=on&theme=light",
    );
    const settings = settingsFromParams(params);
    expect(settings.serviceBaseUrl).toBe("http://host:9999");
    expect(settings.backendId).toBe("live");
    expect(settings.memoryEnabled).toBe(true);
    expect(settings.theme).toBe("light");
  });

  it("keeps defaults when parameters are absent", () => {
    expect(settingsFromParams(new URLSearchParams(""))).toEqual(DEFAULT_SETTINGS);
  });

  it("validates the base url before any request", () => {
    expect(() => validateBaseUrl("not a url")).toThrow();
    expect(() => validateBaseUrl("ftp://host")).toThrow();
    expect(validateBaseUrl("http://ok:1234/")).toBe("http://ok:1234");
  });

  it("ignores unknown theme values", () => {
    const settings = settingsFromParams(new URLSearchParams("theme=sparkly"));
    expect(settings.theme).toBe(DEFAULT_SETTINGS.theme);
  });
});
