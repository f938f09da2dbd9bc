/** API base URL: runtime override via window.AVD_API_BASE, else local dev default. */

declare global {
  interface Window {
    AVD_API_BASE?: string;
  }
}

export function apiBase(): string {
  if (typeof window !== "undefined" && window.AVD_API_BASE) {
    return window.AVD_API_BASE.replace(/\/$/, "");
  }
  return "http://127.0.0.1:8000";
}
