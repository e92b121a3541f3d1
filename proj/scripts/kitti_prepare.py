#!/usr/bin/env python3
"""Extract SIFT descriptors for a KITTI-raw drive and write a query manifest.

Writes <drive>/descriptors/%010d.desc (one VLDB record each) from
<drive>/image_01/data/*.png, then <drive>/queries.csv sampling one frame per
second starting at --start-s, with the oxts position as truth.
"""

import argparse
import pathlib
import struct
import sys

import cv2
import numpy as np


def write_desc(path, desc):
    desc = np.zeros((0, 128), np.float32) if desc is None else desc.astype("<f4")
    with open(path, "wb") as f:
        f.write(struct.pack("<QqddI", 0, 0, 0.0, 0.0, desc.shape[0]))
        f.write(desc.tobytes())


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("drive", type=pathlib.Path)
    ap.add_argument("--camera", default="image_01")
    ap.add_argument("--queries", type=int, default=6)
    ap.add_argument("--start-s", type=float, default=20.0)
    ap.add_argument("--hz", type=float, default=10.0)
    args = ap.parse_args()

    images = sorted((args.drive / args.camera / "data").glob("*.png"))
    if not images:
        sys.exit(f"no images under {args.drive / args.camera / 'data'}")
    out = args.drive / "descriptors"
    out.mkdir(exist_ok=True)
    sift = cv2.SIFT_create()
    for i, img in enumerate(images):
        gray = cv2.imread(str(img), cv2.IMREAD_GRAYSCALE)
        _, desc = sift.detectAndCompute(gray, None)
        write_desc(out / f"{i:010d}.desc", desc)
        if i % 100 == 0:
            print(f"{i}/{len(images)}", file=sys.stderr)

    stamps = (args.drive / "oxts" / "timestamps.txt").read_text().split("\n")
    rows = ["query_ts_ns,descriptor_path,truth_lat,truth_lon"]
    for q in range(args.queries):
        i = int(round((args.start_s + q) * args.hz))
        lat, lon = (args.drive / "oxts" / "data" / f"{i:010d}.txt").read_text().split()[:2]
        ts = np.datetime64(stamps[i].strip().replace(" ", "T"), "ns").astype(np.int64)
        rows.append(f"{ts},descriptors/{i:010d}.desc,{lat},{lon}")
    (args.drive / "queries.csv").write_text("\n".join(rows) + "\n")


if __name__ == "__main__":
    main()
