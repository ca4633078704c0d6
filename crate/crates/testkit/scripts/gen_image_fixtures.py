"""Writes the image header fixtures and their manifest.

Expected values come from how each file is produced, not from reading the
files back. Run from the repository root:

    python3 crates/testkit/scripts/gen_image_fixtures.py
"""

import csv
import io
import os
import struct

from PIL import Image

OUT = os.path.join(os.path.dirname(__file__), "..", "data", "images")
rows = []


def save(name, data, mime, width, height, invisible, error=""):
    with open(os.path.join(OUT, name), "wb") as f:
        f.write(data)
    rows.append(
        {
            "filename": name,
            "mime": mime,
            "width": "" if width is None else width,
            "height": "" if height is None else height,
            "invisible": "true" if invisible else "false",
            "error": error,
        }
    )


def encode(img, fmt, **kw):
    buf = io.BytesIO()
    img.save(buf, fmt, **kw)
    return buf.getvalue()


def rgb(w, h, color=(200, 30, 30)):
    return Image.new("RGB", (w, h), color)


def raster(name, fmt, mime, w, h, img=None, **kw):
    data = encode(img if img is not None else rgb(w, h), fmt, **kw)
    save(name, data, mime, w, h, w == 1 and h == 1)
    return data


# GIF
raster("gif_1x1.gif", "GIF", "image/gif", 1, 1, Image.new("P", (1, 1), 0))
raster("gif_1x1_transparent.gif", "GIF", "image/gif", 1, 1, Image.new("P", (1, 1), 0), transparency=0)
raster("gif_88x31.gif", "GIF", "image/gif", 88, 31)
frames = [Image.new("P", (40, 20), i) for i in range(3)]
buf = io.BytesIO()
frames[0].save(buf, "GIF", save_all=True, append_images=frames[1:], duration=50)
save("gif_animated_40x20.gif", buf.getvalue(), "image/gif", 40, 20, False)
gif = encode(Image.new("P", (1, 1), 0), "GIF")
save("gif_truncated.gif", gif[:8], "image/gif", None, None, False, "truncated_image")
zero = bytearray(encode(Image.new("P", (3, 3), 0), "GIF"))
zero[6:8] = struct.pack("<H", 0)
save("gif_zero_width.gif", bytes(zero), "image/gif", None, None, False, "zero_dimension")
# 1x2 is not invisible
raster("gif_1x2.gif", "GIF", "image/gif", 1, 2, Image.new("P", (1, 2), 0))

# PNG
raster("png_1x1.png", "PNG", "image/png", 1, 1)
raster("png_1x1_rgba.png", "PNG", "image/png", 1, 1, Image.new("RGBA", (1, 1), (0, 0, 0, 0)))
raster("png_300x250.png", "PNG", "image/png", 300, 250)
raster("png_2x1_interlaced.png", "PNG", "image/png", 2, 1, rgb(2, 1), interlace=1)
png = encode(rgb(5, 5), "PNG")
save("png_truncated.png", png[:20], "image/png", None, None, False, "truncated_image")
zero = bytearray(png)
zero[20:24] = struct.pack(">I", 0)
save("png_zero_height.png", bytes(zero), "image/png", None, None, False, "zero_dimension")

# JPEG
raster("jpeg_1x1.jpg", "JPEG", "image/jpeg", 1, 1)
raster("jpeg_640x480.jpg", "JPEG", "image/jpeg", 640, 480)
raster("jpeg_progressive_120x90.jpg", "JPEG", "image/jpeg", 120, 90, progressive=True)
exif = Image.Exif()
exif[0x010F] = "fixture-camera"
raster("jpeg_exif_33x17.jpg", "JPEG", "image/jpeg", 33, 17, exif=exif.tobytes())
jpg = encode(rgb(10, 10), "JPEG")
sof = jpg.index(b"\xff\xc0")
save("jpeg_truncated.jpg", jpg[: sof + 4], "image/jpeg", None, None, False, "truncated_image")
save("jpeg_app0_only.jpg", jpg[:20], "image/jpeg", None, None, False, "truncated_image")

# WebP: lossy (VP8), lossless (VP8L), extended (VP8X via alpha + lossy)
raster("webp_1x1_lossy.webp", "WEBP", "image/webp", 1, 1, quality=80)
raster("webp_1x1_lossless.webp", "WEBP", "image/webp", 1, 1, lossless=True)
raster("webp_50x40_lossy.webp", "WEBP", "image/webp", 50, 40, quality=80)
raster("webp_64x48_lossless.webp", "WEBP", "image/webp", 64, 48, lossless=True)
raster(
    "webp_30x20_alpha.webp",
    "WEBP",
    "image/webp",
    30,
    20,
    Image.new("RGBA", (30, 20), (10, 20, 30, 128)),
    quality=80,
    exif=exif.tobytes(),
)
webp = encode(rgb(8, 8), "WEBP", lossless=True)
save("webp_truncated.webp", webp[:18], "image/webp", None, None, False, "truncated_image")

# SVG: dimensions from the root element's attributes
SVG = '<svg xmlns="http://www.w3.org/2000/svg"{attrs}><rect width="1" height="1"/></svg>'


def svg(name, attrs, width, height, invisible, prolog=""):
    text = prolog + SVG.format(attrs=attrs)
    save(name, text.encode(), "image/svg+xml", width, height, invisible)


svg("svg_1x1.svg", ' width="1" height="1"', 1, 1, True)
svg("svg_1px.svg", ' width="1px" height="1px"', 1, 1, True)
svg("svg_half.svg", ' width="0.5" height="0.25"', 0.5, 0.25, True)
svg("svg_zero.svg", ' width="0" height="0"', 0, 0, True)
svg("svg_1x2.svg", ' width="1" height="2"', 1, 2, False)
svg("svg_100x80.svg", ' width="100" height="80"', 100, 80, False)
svg("svg_percent.svg", ' width="100%" height="1"', None, None, False)
svg("svg_viewbox_only.svg", ' viewBox="0 0 1 1"', None, None, False)
svg("svg_em_units.svg", ' width="1em" height="1em"', None, None, False)
svg(
    "svg_prolog_1x1.svg",
    ' width="1" height="1"',
    1,
    1,
    True,
    '<?xml version="1.0" encoding="UTF-8"?>\n<!-- pixel -->\n'
    '<!DOCTYPE svg PUBLIC "-//W3C//DTD SVG 1.1//EN" '
    '"http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd">\n',
)

with open(os.path.join(OUT, "manifest.csv"), "w", newline="") as f:
    w = csv.DictWriter(f, fieldnames=["filename", "mime", "width", "height", "invisible", "error"])
    w.writeheader()
    w.writerows(rows)
print(f"{len(rows)} fixtures")
