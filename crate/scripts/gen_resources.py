#!/usr/bin/env python3
"""Regenerate the character resource tables under data/.

Inputs:
  * pypinyin                (pip install pypinyin)          -> pinyin.tsv
  * four-corner-method      (pip install four-corner-method) -> fourcorner.tsv
  * hanzipy cjk_decomp.txt  (pip download hanzipy)           -> structure.tsv
  * cnchar + cnchar-order   (npm install)                    -> strokes.tsv
  * hanzipy chinese_charfreq_simpl_trad.csv selects the character set

Usage:
  gen_resources.py --hanzipy-data DIR --node-modules DIR [--count 5000] [--out data]
"""

import argparse
import csv
import os
import pickle
import subprocess
import sys
from pathlib import Path

from pypinyin import Style, pinyin

HERE = Path(__file__).resolve().parent

# cjk_decomp layout operator -> single ideographic description character.
LAYOUT = {
    "a": "⿰", "d": "⿱", "s": "⿴", "st": "⿵", "sb": "⿶", "sl": "⿷",
    "stl": "⿸", "str": "⿹", "sbl": "⿺", "w": "⿻",
}

# Five-class stroke scheme: 1 heng, 2 shu, 3 pie, 4 dian/na, 5 zhe.
STROKE_CLASS = {
    "横": "1", "提": "1",
    "竖": "2", "竖钩": "2",
    "撇": "3",
    "点": "4", "点2": "4", "捺": "4",
}


def pinyin_rows(chars):
    for ch in chars:
        (reading,) = pinyin(ch, style=Style.TONE3, heteronym=False, v_to_u=True)
        r = reading[0]
        if r and r != ch and all(c.isalpha() or c in "1234" for c in r):
            yield ch, r


def fourcorner_rows(chars):
    import four_corner_method

    data_path = Path(four_corner_method.__file__).parent / "data" / "data.pkl"
    with open(data_path, "rb") as f:
        table = pickle.load(f)
    for ch in chars:
        code = table.get(ch)
        if code and len(code) == 5 and code.isdigit():
            yield ch, code


def load_decomp(path):
    decomp = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if ":" not in line:
                continue
            key, rest = line.split(":", 1)
            op, _, args = rest.partition("(")
            comps = [c for c in args.rstrip(")").split(",") if c]
            decomp[key] = (op, comps)
    return decomp


def component_symbol(comp, decomp, depth):
    # Numbered entries are unnamed intermediate shapes: expand them, or map to
    # a private-use code point once the depth budget is exhausted.
    if comp.isdigit():
        if depth > 0 and comp in decomp:
            return structure_code(comp, decomp, depth - 1)
        return chr(0xE000 + int(comp) % 0x1900)
    return comp


def structure_code(key, decomp, depth=2):
    op, comps = decomp.get(key, ("c", []))
    ids = LAYOUT.get(op.split("/")[0])
    if ids is None or not comps:
        return key if not key.isdigit() else chr(0xE000 + int(key) % 0x1900)
    return ids + "".join(component_symbol(c, decomp, depth) for c in comps)


def structure_rows(chars, decomp):
    for ch in chars:
        if ch in decomp:
            yield ch, structure_code(ch, decomp)


def stroke_rows(chars, node_modules):
    env = dict(os.environ, NODE_PATH=str(node_modules))
    proc = subprocess.run(
        ["node", str(HERE / "strokes.js")],
        input="\n".join(chars) + "\n",
        capture_output=True, text=True, env=env, check=True,
    )
    for line in proc.stdout.splitlines():
        if "\t" not in line:
            continue
        ch, names = line.split("\t", 1)
        seq = "".join(STROKE_CLASS.get(n, "5") for n in names.split(","))
        if seq:
            yield ch, seq


def write_tsv(path, rows):
    rows = list(rows)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for ch, val in rows:
            f.write(f"{ch}\t{val}\n")
    print(f"{path}: {len(rows)} rows", file=sys.stderr)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--hanzipy-data", required=True, type=Path)
    ap.add_argument("--node-modules", required=True, type=Path)
    ap.add_argument("--count", type=int, default=5000)
    ap.add_argument("--out", type=Path, default=HERE.parent / "data")
    args = ap.parse_args()

    with open(args.hanzipy_data / "chinese_charfreq_simpl_trad.csv", encoding="utf-8") as f:
        chars = []
        seen = set()
        for row in csv.DictReader(f):
            ch = row["simplified"]
            if len(ch) == 1 and ch not in seen:
                seen.add(ch)
                chars.append(ch)
            if len(chars) >= args.count:
                break

    args.out.mkdir(parents=True, exist_ok=True)
    decomp = load_decomp(args.hanzipy_data / "cjk_decomp.txt")
    write_tsv(args.out / "pinyin.tsv", pinyin_rows(chars))
    write_tsv(args.out / "fourcorner.tsv", fourcorner_rows(chars))
    write_tsv(args.out / "structure.tsv", structure_rows(chars, decomp))
    write_tsv(args.out / "strokes.tsv", stroke_rows(chars, args.node_modules))


if __name__ == "__main__":
    main()
