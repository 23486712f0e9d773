#!/usr/bin/env python3
"""Regenerates include/promdec/unicode_tables.hpp from Python's unicodedata."""
import sys
import unicodedata

MAX = 0x110000


def ranges(pred):
    out = []
    start = None
    for cp in range(MAX):
        hit = pred(cp)
        if hit and start is None:
            start = cp
        elif not hit and start is not None:
            out.append((start, cp - 1))
            start = None
    if start is not None:
        out.append((start, MAX - 1))
    return out


def is_punct_or_symbol(cp):
    if cp == ord("|"):
        return False
    return unicodedata.category(chr(cp))[0] in "PS"


def is_space(cp):
    return chr(cp).isspace()


def lower_pairs():
    pairs = []
    for cp in range(MAX):
        c = chr(cp)
        low = c.lower()
        if len(low) == 1 and low != c and low.lower() == low:
            pairs.append((cp, ord(low)))
    return pairs


def emit_ranges(name, rs):
    lines = [f"inline constexpr CodepointRange {name}[] = {{"]
    for a, b in rs:
        lines.append(f"    {{0x{a:X}, 0x{b:X}}},")
    lines.append("};")
    return "\n".join(lines)


def main():
    pairs = lower_pairs()
    body = [
        "// Generated by tools/gen_unicode_tables.py (Unicode "
        + unicodedata.unidata_version + "). Do not edit.",
        "#pragma once",
        "",
        "#include <cstdint>",
        "",
        "namespace promdec::unicode::tables {",
        "",
        "struct CodepointRange {",
        "  char32_t first;",
        "  char32_t last;",
        "};",
        "",
        "struct CaseMapping {",
        "  char32_t from;",
        "  char32_t to;",
        "};",
        "",
        "// General categories P* and S*, minus U+007C.",
        emit_ranges("kPunctuationOrSymbol", ranges(is_punct_or_symbol)),
        "",
        emit_ranges("kWhiteSpace", ranges(is_space)),
        "",
        "// Simple (1:1) lowercase mappings.",
        "inline constexpr CaseMapping kLowercase[] = {",
    ]
    for a, b in pairs:
        body.append(f"    {{0x{a:X}, 0x{b:X}}},")
    body += ["};", "", "}  // namespace promdec::unicode::tables", ""]
    sys.stdout.write("\n".join(body))


if __name__ == "__main__":
    main()
