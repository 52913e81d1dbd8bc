#!/usr/bin/env python3
"""Convert a flat gate-level Verilog netlist (primitive gates only) to .bench.

Used once to import the ISCAS-85 circuits shipped in the `circuitgraph`
Python package. Supports the primitives and/or/nand/nor/xor/xnor/not/buf,
`assign a = b;` buffers, and drops outputs tied to 1'b0/1'b1 constants
(the .bench dialect has no constant sources).
"""
import re
import sys

PRIMS = {"and": "AND", "or": "OR", "nand": "NAND", "nor": "NOR", "xor": "XOR",
         "xnor": "XNOR", "not": "NOT", "buf": "BUF"}


def names(decl):
    return [n.strip() for n in decl.split(",") if n.strip()]


def convert(text, name):
    text = re.sub(r"//.*", "", text)
    stmts = [s.strip() for s in text.replace("\n", " ").split(";")]
    inputs, outputs, gates, consts = [], [], [], set()
    for s in stmts:
        if s.startswith("input "):
            inputs += names(s[6:])
        elif s.startswith("output "):
            outputs += names(s[7:])
        elif s.startswith("assign "):
            lhs, rhs = [t.strip() for t in s[7:].split("=")]
            if "'b" in rhs:
                consts.add(lhs)
            else:
                gates.append((lhs, "BUF", [rhs]))
        else:
            m = re.match(r"(\w+)\s+\w+\s*\((.*)\)$", s)
            if m and m.group(1) in PRIMS:
                pins = names(m.group(2))
                gates.append((pins[0], PRIMS[m.group(1)], pins[1:]))
    lines = [f"# {name}: ISCAS-85, converted from gate-level Verilog"]
    if consts:
        lines.append("# constant outputs dropped: " + " ".join(sorted(consts)))
    lines.append(f"# {len(inputs)} inputs, {len(outputs) - len(consts)} outputs, {len(gates)} gates")
    lines += [f"INPUT({i})" for i in inputs]
    lines += [f"OUTPUT({o})" for o in outputs if o not in consts]
    lines.append("")
    lines += [f"{out} = {fn}({', '.join(ins)})" for out, fn, ins in gates]
    return "\n".join(lines) + "\n"


if __name__ == "__main__":
    src, dst = sys.argv[1], sys.argv[2]
    name = re.sub(r"\.v$", "", src.split("/")[-1])
    with open(src) as f, open(dst, "w") as g:
        g.write(convert(f.read(), name))
