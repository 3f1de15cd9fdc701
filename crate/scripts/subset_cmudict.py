#!/usr/bin/env python3
"""Regenerate crates/core/data/cmudict-mini.dict.

Keeps the CMU entries for every word that appears in the sources, tests and
golden data, so the bundled dictionary covers everything shipped here.

usage: scripts/subset_cmudict.py /path/to/cmudict.dict
"""
import pathlib
import re
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent
OUT = ROOT / "crates/core/data/cmudict-mini.dict"
SCAN = ["crates", "data/golden", "README.md"]
SUFFIXES = {".rs", ".txt", ".md", ".toml", ".js", ".html"}
# Frequent words worth having for quick experiments beyond the shipped text.
EXTRA = """
the a an and or but if of to in on at by for with from up down out over under
i me my you your he him his she her it its we us our they them their this that
is are was were be been am do does did have has had go goes went come came get
got make made take took know knew see saw say said think thought want need feel
love hate life death money time night day light right fight flow show know
street beat heat rhyme mind grind shine line crime dime rap track back black
"""

word_re = re.compile(r"[a-z][a-z']*")


def vocabulary():
    words = set(EXTRA.split())
    for entry in SCAN:
        path = ROOT / entry
        files = [path] if path.is_file() else path.rglob("*")
        for f in files:
            if f.is_file() and f.suffix in SUFFIXES and "target" not in f.parts:
                text = f.read_text(encoding="utf-8", errors="ignore").lower()
                text = text.replace("’", "'").replace("\\n", " ").replace("\\t", " ")
                for w in word_re.findall(text):
                    words.add(w)
                    words.add(w.strip("'"))
                    if w.endswith("in'"):
                        words.add(w[:-1] + "g")
    return words


def main():
    source = pathlib.Path(sys.argv[1])
    words = vocabulary()
    kept = []
    for line in source.read_text(encoding="utf-8").splitlines():
        if not line or line.startswith(";;;"):
            continue
        head = line.split(None, 1)[0]
        base = head.split("(", 1)[0]
        if base in words:
            kept.append(line.split("#", 1)[0].rstrip())
    OUT.write_text("\n".join(kept) + "\n", encoding="utf-8")
    print(f"{len(kept)} entries -> {OUT.relative_to(ROOT)}")


if __name__ == "__main__":
    main()
