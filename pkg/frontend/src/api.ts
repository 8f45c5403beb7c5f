/** Typed client for the labeling session API served on localhost. */

export interface NextBox {
  id: number;
  total: number;
  remaining: number;
  png_base64: string;
}

export interface Progress {
  labeled: number;
  skipped: number;
  remaining: number;
}

export type LabelOutcome = "accepted" | "invalid" | "conflict";

export class SessionApi {
  constructor(private readonly baseUrl: string = "") {}

  /** Next unlabeled box, or null once the session is complete (204). */
  async next(): Promise<NextBox | null> {
    const resp = await fetch(`${this.baseUrl}/session/next`);
    if (resp.status === 204) return null;
    if (!resp.ok) throw new Error(`next failed: HTTP ${resp.status}`);
    return (await resp.json()) as NextBox;
  }

  async label(id: number, char: string): Promise<LabelOutcome> {
    const resp = await fetch(`${this.baseUrl}/session/label`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ id, char }),
    });
    if (resp.ok) return "accepted";
    if (resp.status === 400) return "invalid";
    if (resp.status === 409) return "conflict";
    throw new Error(`label failed: HTTP ${resp.status}`);
  }

  async skip(id: number): Promise<void> {
    const resp = await fetch(`${this.baseUrl}/session/skip`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ id }),
    });
    if (!resp.ok) throw new Error(`skip failed: HTTP ${resp.status}`);
  }

  async progress(): Promise<Progress> {
    const resp = await fetch(`${this.baseUrl}/session/progress`);
    if (!resp.ok) throw new Error(`progress failed: HTTP ${resp.status}`);
    return (await resp.json()) as Progress;
  }
}
