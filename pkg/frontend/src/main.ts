import { SessionApi } from "./api.js";
import { DecodedImage, LabelerApp } from "./app.js";

function decodePng(pngBase64: string): Promise<DecodedImage> {
  return new Promise((resolve, reject) => {
    const img = new Image();
    img.onload = () => resolve({ width: img.naturalWidth, height: img.naturalHeight, source: img });
    img.onerror = () => reject(new Error("failed to decode crop"));
    img.src = `data:image/png;base64,${pngBase64}`;
  });
}

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing #${id}`);
  return node;
}

const app = new LabelerApp(
  new SessionApi(),
  {
    canvas: el("crop") as HTMLCanvasElement,
    status: el("status"),
    progress: el("progress"),
    banner: el("banner"),
    message: el("message"),
  },
  decodePng,
);

app.attach(document.body);
void app.start();
