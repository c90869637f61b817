/** Client-side thumbnail: a data URL of the original file, or null.
 *
 * Thumbnails are cosmetic — any failure (no FileReader, unreadable blob)
 * degrades to null rather than blocking the upload flow. The bytes sent to
 * the API are always the untouched original file.
 */

export function fileToThumbnail(file: File): Promise<string | null> {
  if (typeof FileReader === "undefined") {
    return Promise.resolve(null);
  }
  return new Promise((resolve) => {
    const reader = new FileReader();
    reader.onload = () => {
      resolve(typeof reader.result === "string" ? reader.result : null);
    };
    reader.onerror = () => resolve(null);
    try {
      reader.readAsDataURL(file);
    } catch {
      resolve(null);
    }
  });
}
