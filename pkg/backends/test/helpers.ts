import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { PNG } from "pngjs";
import type { DecodedImage } from "../src/png";

export type Painter = (x: number, y: number) => [number, number, number];

export function paintImage(width: number, height: number, painter: Painter): DecodedImage {
  const rgba = new Uint8Array(width * height * 4);
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const [r, g, b] = painter(x, y);
      const i = (y * width + x) * 4;
      rgba[i] = r;
      rgba[i + 1] = g;
      rgba[i + 2] = b;
      rgba[i + 3] = 255;
    }
  }
  return { width, height, rgba };
}

export function writePng(filePath: string, image: DecodedImage): void {
  const png = new PNG({ width: image.width, height: image.height });
  Buffer.from(image.rgba).copy(png.data);
  fs.writeFileSync(filePath, PNG.sync.write(png));
}

export function tempDir(prefix: string): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), prefix));
}

/** White background with solid dark rectangles: the synthetic scene. */
export function rectScene(
  width: number,
  height: number,
  rects: Array<[number, number, number, number]>,
): DecodedImage {
  return paintImage(width, height, (x, y) => {
    for (const [x0, y0, x1, y1] of rects) {
      if (x >= x0 && x < x1 && y >= y0 && y < y1) return [40, 45, 50];
    }
    return [235, 235, 235];
  });
}
