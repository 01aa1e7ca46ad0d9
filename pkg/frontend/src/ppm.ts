// Binary PPM (P6, maxval 255) decoding for the plan overlay image.

export interface DecodedImage {
  width: number;
  height: number;
  rgba: Uint8ClampedArray;
}

export function decodeBase64(b64: string): Uint8Array {
  if (typeof atob === "function") {
    const bin = atob(b64);
    const out = new Uint8Array(bin.length);
    for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
    return out;
  }
  // node path (tests)
  return new Uint8Array(Buffer.from(b64, "base64"));
}

export function decodePpm(bytes: Uint8Array): DecodedImage {
  let pos = 0;

  function token(): string {
    let t = "";
    while (pos < bytes.length) {
      const ch = bytes[pos];
      if (ch === 0x23) {
        // comment until newline
        while (pos < bytes.length && bytes[pos] !== 0x0a) pos++;
        continue;
      }
      const isSpace = ch === 0x20 || ch === 0x09 || ch === 0x0a || ch === 0x0d;
      if (isSpace) {
        pos++;
        if (t) return t;
        continue;
      }
      t += String.fromCharCode(ch);
      pos++;
    }
    if (!t) throw new Error("truncated ppm header");
    return t;
  }

  if (token() !== "P6") throw new Error("not a P6 ppm");
  const width = parseInt(token(), 10);
  const height = parseInt(token(), 10);
  const maxval = parseInt(token(), 10);
  if (maxval !== 255) throw new Error("only maxval 255 supported");
  const need = width * height * 3;
  if (bytes.length - pos < need) throw new Error("truncated ppm payload");
  const rgba = new Uint8ClampedArray(width * height * 4);
  for (let i = 0; i < width * height; i++) {
    rgba[i * 4] = bytes[pos + i * 3];
    rgba[i * 4 + 1] = bytes[pos + i * 3 + 1];
    rgba[i * 4 + 2] = bytes[pos + i * 3 + 2];
    rgba[i * 4 + 3] = 255;
  }
  return { width, height, rgba };
}

export function decodePlanImage(b64: string): DecodedImage {
  return decodePpm(decodeBase64(b64));
}
