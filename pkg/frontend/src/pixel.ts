// Eyedropper core: read the exact pixel under a coordinate from RGBA raster
// data (canvas ImageData or any object with the same shape).

import type { RGB } from "./types.js";

export interface RasterLike {
  width: number;
  height: number;
  data: Uint8ClampedArray | number[];
}

export function pickPixel(image: RasterLike, x: number, y: number): RGB {
  const px = Math.floor(x);
  const py = Math.floor(y);
  if (px < 0 || py < 0 || px >= image.width || py >= image.height) {
    throw new RangeError(`pixel (${px}, ${py}) outside ${image.width}x${image.height} image`);
  }
  const offset = (py * image.width + px) * 4;
  return [image.data[offset], image.data[offset + 1], image.data[offset + 2]] as RGB;
}
