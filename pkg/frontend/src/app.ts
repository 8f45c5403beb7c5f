/** Session controller: shows one glyph crop, takes one keypress, advances.
 *
 * The client keeps no authoritative state: everything shown is rebuilt from
 * GET /session/next and /session/progress, so a reload or reconnect resumes
 * exactly where the store left off.
 */

import { NextBox, Progress, SessionApi } from "./api.js";

export const ALPHABET = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-";
export const SKIP_KEY = " ";
export const MIN_SCALE = 8;

export interface DecodedImage {
  width: number;
  height: number;
  source: CanvasImageSource;
}

/** Decodes a base64 PNG; injected so tests can skip real image decoding. */
export type ImageDecoder = (pngBase64: string) => Promise<DecodedImage>;

export interface Elements {
  canvas: HTMLCanvasElement;
  status: HTMLElement; // current box line
  progress: HTMLElement; // labeled / skipped / remaining counters
  banner: HTMLElement; // connection-retry banner
  message: HTMLElement; // inline rejection / flash messages
}

export class LabelerApp {
  private current: NextBox | null = null;
  private inFlight = false;
  private disconnected = false;

  constructor(
    private readonly api: SessionApi,
    private readonly els: Elements,
    private readonly decode: ImageDecoder,
  ) {}

  get currentBoxId(): number | null {
    return this.current ? this.current.id : null;
  }

  attach(target: { addEventListener: HTMLElement["addEventListener"] }): void {
    target.addEventListener("keydown", (event) => {
      void this.handleKey((event as KeyboardEvent).key);
    });
  }

  async start(): Promise<void> {
    await this.advance();
  }

  /** Fetch and render the next box; null means the session is complete. */
  async advance(): Promise<void> {
    try {
      const [box, progress] = await Promise.all([this.api.next(), this.api.progress()]);
      this.disconnected = false;
      this.els.banner.hidden = true;
      this.renderProgress(progress);
      this.current = box;
      if (box === null) {
        this.renderComplete(progress);
        return;
      }
      await this.renderCrop(box);
      this.els.status.textContent = `box ${box.id} of ${box.total}`;
      this.els.message.textContent = "";
    } catch {
      this.disconnected = true;
      this.current = null;
      this.els.banner.hidden = false;
      this.els.banner.textContent = "connection lost - press any key to retry";
    }
  }

  async handleKey(key: string): Promise<void> {
    if (this.inFlight) return; // one request per keypress, no double submit
    if (this.disconnected) {
      await this.advance();
      return;
    }
    if (this.current === null) return;
    const char = key.length === 1 ? key.toUpperCase() : key;
    const isSkip = key === SKIP_KEY;
    if (!isSkip && !ALPHABET.includes(char)) {
      this.flash(`ignored key ${JSON.stringify(key)}`);
      return;
    }
    const boxId = this.current.id;
    this.inFlight = true;
    try {
      if (isSkip) {
        await this.api.skip(boxId);
      } else {
        const outcome = await this.api.label(boxId, char);
        if (outcome === "invalid") {
          this.els.message.textContent = "label rejected - box unchanged";
          return; // box stays current
        }
      }
      await this.advance();
    } catch {
      this.disconnected = true;
      this.els.banner.hidden = false;
      this.els.banner.textContent = "connection lost - press any key to retry";
    } finally {
      this.inFlight = false;
    }
  }

  private async renderCrop(box: NextBox): Promise<void> {
    const decoded = await this.decode(box.png_base64);
    const scale = Math.max(MIN_SCALE, Math.ceil(480 / Math.max(decoded.width, decoded.height)));
    this.els.canvas.width = decoded.width * scale;
    this.els.canvas.height = decoded.height * scale;
    const ctx = this.els.canvas.getContext("2d");
    if (ctx === null) return;
    ctx.imageSmoothingEnabled = false; // crisp pixels at 8x and beyond
    ctx.clearRect(0, 0, this.els.canvas.width, this.els.canvas.height);
    ctx.drawImage(decoded.source, 0, 0, decoded.width * scale, decoded.height * scale);
  }

  private renderProgress(progress: Progress): void {
    this.els.progress.textContent =
      `labeled ${progress.labeled} - skipped ${progress.skipped} - remaining ${progress.remaining}`;
  }

  private renderComplete(progress: Progress): void {
    const total = progress.labeled + progress.skipped;
    this.els.status.textContent = `session complete: ${total} boxes (${progress.labeled} labeled, ${progress.skipped} skipped)`;
    this.els.message.textContent = "";
  }

  private flash(text: string): void {
    this.els.message.textContent = text;
  }
}
