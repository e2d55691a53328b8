#!/usr/bin/env python3
"""Writes the bundled .bench circuits.

c17 and s27 are the ISCAS netlists. The rest are generated arithmetic,
control and sequential blocks; unused logic is pruned so every gate drives
something.
"""

import argparse
import pathlib

C17 = """# c17
INPUT(1)
INPUT(2)
INPUT(3)
INPUT(6)
INPUT(7)
OUTPUT(22)
OUTPUT(23)
10 = NAND(1, 3)
11 = NAND(3, 6)
16 = NAND(2, 11)
19 = NAND(11, 7)
22 = NAND(10, 16)
23 = NAND(16, 19)
"""

S27 = """# s27
INPUT(G0)
INPUT(G1)
INPUT(G2)
INPUT(G3)
OUTPUT(G17)
G5 = DFF(G10)
G6 = DFF(G11)
G7 = DFF(G13)
G14 = NOT(G0)
G17 = NOT(G11)
G8 = AND(G14, G6)
G15 = OR(G12, G8)
G16 = OR(G3, G8)
G9 = NAND(G16, G15)
G10 = NOR(G14, G11)
G11 = NOR(G5, G9)
G12 = NOR(G1, G7)
G13 = NOR(G2, G12)
"""


class Circuit:
    def __init__(self, name):
        self.name = name
        self.inputs = []
        self.outputs = []
        self.cells = []  # (out, op, fanins)
        self.count = 0

    def inp(self, name):
        self.inputs.append(name)
        return name

    def gate(self, op, *fanins, name=None):
        if name is None:
            self.count += 1
            name = f"n{self.count}"
        self.cells.append((name, op, list(fanins)))
        return name

    def dff(self, name):
        """Register whose input is connected later with `close`."""
        self.cells.append((name, "DFF", [None]))
        return name

    def close(self, reg, src):
        for i, (out, op, fi) in enumerate(self.cells):
            if out == reg:
                self.cells[i] = (out, op, [src])
                return
        raise KeyError(reg)

    def out(self, net):
        self.outputs.append(net)

    def prune(self):
        live = set(self.outputs)
        by_out = {c[0]: c for c in self.cells}
        stack = list(self.outputs)
        while stack:
            n = stack.pop()
            c = by_out.get(n)
            if c is None:
                continue
            for f in c[2]:
                if f not in live:
                    live.add(f)
                    stack.append(f)
        self.cells = [c for c in self.cells if c[0] in live]

    def text(self):
        self.prune()
        lines = [f"# {self.name}"]
        lines += [f"INPUT({i})" for i in self.inputs]
        lines += [f"OUTPUT({o})" for o in self.outputs]
        lines += [f"{o} = {op}({', '.join(fi)})" for o, op, fi in self.cells]
        return "\n".join(lines) + "\n"

    # building blocks
    def full_adder(self, a, b, c):
        t = self.gate("XOR", a, b)
        s = self.gate("XOR", t, c)
        co = self.gate("OR", self.gate("AND", a, b), self.gate("AND", t, c))
        return s, co

    def half_adder(self, a, b):
        return self.gate("XOR", a, b), self.gate("AND", a, b)

    def nand_full_adder(self, a, b, c):
        n1 = self.gate("NAND", a, b)
        n2 = self.gate("NAND", a, n1)
        n3 = self.gate("NAND", b, n1)
        t = self.gate("NAND", n2, n3)
        n5 = self.gate("NAND", t, c)
        n6 = self.gate("NAND", t, n5)
        n7 = self.gate("NAND", c, n5)
        s = self.gate("NAND", n6, n7)
        co = self.gate("NAND", n5, n1)
        return s, co

    def mux2(self, s, a, b):
        ns = self.gate("NOT", s)
        return self.gate("OR", self.gate("AND", ns, a), self.gate("AND", s, b))


def rca(bits):
    c = Circuit(f"rca{bits}")
    a = [c.inp(f"a{i}") for i in range(bits)]
    b = [c.inp(f"b{i}") for i in range(bits)]
    carry = c.inp("cin")
    for i in range(bits):
        s, carry = c.full_adder(a[i], b[i], carry)
        c.out(s)
    c.out(carry)
    return c


def array_multiplier(bits, name, nand_adders=False):
    c = Circuit(name)
    a = [c.inp(f"a{i}") for i in range(bits)]
    b = [c.inp(f"b{i}") for i in range(bits)]
    fa = c.nand_full_adder if nand_adders else c.full_adder
    row = [c.gate("AND", a[i], b[0]) for i in range(bits)]
    c.out(row[0])
    acc = row[1:]
    for j in range(1, bits):
        pp = [c.gate("AND", a[i], b[j]) for i in range(bits)]
        nxt = []
        carry = None
        for i in range(bits):
            x = acc[i] if i < len(acc) else None
            if x is None and carry is None:
                nxt.append(pp[i])
                continue
            if x is None:
                s, carry = c.half_adder(pp[i], carry)
            elif carry is None:
                s, carry = c.half_adder(pp[i], x)
            else:
                s, carry = fa(pp[i], x, carry)
            nxt.append(s)
        nxt.append(carry)
        c.out(nxt[0])
        acc = nxt[1:]
    for s in acc:
        c.out(s)
    return c


def comparator(bits):
    c = Circuit(f"cmp{bits}")
    a = [c.inp(f"a{i}") for i in range(bits)]
    b = [c.inp(f"b{i}") for i in range(bits)]
    gt, eq = None, None
    for i in reversed(range(bits)):
        nb = c.gate("NOT", b[i])
        g = c.gate("AND", a[i], nb)
        e = c.gate("XNOR", a[i], b[i])
        if gt is None:
            gt, eq = g, e
        else:
            gt = c.gate("OR", gt, c.gate("AND", eq, g))
            eq = c.gate("AND", eq, e)
    lt = c.gate("NOR", gt, eq)
    for n in (gt, eq, lt):
        c.out(n)
    return c


def alu(bits):
    c = Circuit(f"alu{bits}")
    a = [c.inp(f"a{i}") for i in range(bits)]
    b = [c.inp(f"b{i}") for i in range(bits)]
    s0, s1 = c.inp("s0"), c.inp("s1")
    carry = c.inp("cin")
    zero = None
    for i in range(bits):
        f_and = c.gate("AND", a[i], b[i])
        f_or = c.gate("OR", a[i], b[i])
        f_xor = c.gate("XOR", a[i], b[i])
        f_add, carry = c.full_adder(a[i], b[i], carry)
        y = c.mux2(s1, c.mux2(s0, f_and, f_or), c.mux2(s0, f_xor, f_add))
        c.out(y)
        zero = y if zero is None else c.gate("OR", zero, y)
    c.out(carry)
    c.out(c.gate("NOT", zero))
    return c


def parity_chain(bits):
    c = Circuit(f"parity{bits}")
    x = [c.inp(f"x{i}") for i in range(bits)]
    p = x[0]
    for i in range(1, bits):
        p = c.gate("XOR", p, x[i])
    c.out(p)
    return c


def decoder(bits):
    c = Circuit(f"dec{bits}")
    x = [c.inp(f"x{i}") for i in range(bits)]
    en = c.inp("en")
    nx = [c.gate("NOT", v) for v in x]
    for k in range(1 << bits):
        lits = [x[i] if (k >> i) & 1 else nx[i] for i in range(bits)]
        c.out(c.gate("AND", en, *lits))
    return c


def mux(bits):
    n = 1 << bits
    c = Circuit(f"mux{n}")
    d = [c.inp(f"d{i}") for i in range(n)]
    s = [c.inp(f"s{i}") for i in range(bits)]
    ns = [c.gate("NOT", v) for v in s]
    terms = []
    for k in range(n):
        lits = [s[i] if (k >> i) & 1 else ns[i] for i in range(bits)]
        terms.append(c.gate("AND", d[k], *lits))
    while len(terms) > 1:
        terms = [c.gate("OR", terms[i], terms[i + 1]) if i + 1 < len(terms) else terms[i] for i in range(0, len(terms), 2)]
    c.out(terms[0])
    return c


def counter(bits):
    c = Circuit(f"cnt{bits}")
    en = c.inp("en")
    q = [c.dff(f"q{i}") for i in range(bits)]
    t = en
    for i in range(bits):
        c.close(q[i], c.gate("XOR", q[i], t))
        c.out(q[i])
        t = c.gate("AND", t, q[i])
    c.out(t)
    return c


def lfsr(bits):
    c = Circuit(f"lfsr{bits}")
    seed = c.inp("seed")
    q = [c.dff(f"r{i}") for i in range(bits)]
    fb = c.gate("XOR", c.gate("XOR", q[bits - 1], q[5]), c.gate("XOR", q[4], q[3]))
    c.close(q[0], c.gate("XOR", fb, seed))
    for i in range(1, bits):
        c.close(q[i], q[i - 1])
    c.out(q[bits - 1])
    c.out(fb)
    return c


def accumulator(bits):
    c = Circuit(f"acc{bits}")
    x = [c.inp(f"x{i}") for i in range(bits)]
    clr = c.inp("clr")
    nclr = c.gate("NOT", clr)
    q = [c.dff(f"acc{i}") for i in range(bits)]
    carry = None
    for i in range(bits):
        if carry is None:
            s, carry = c.half_adder(x[i], q[i])
        else:
            s, carry = c.full_adder(x[i], q[i], carry)
        c.close(q[i], c.gate("AND", s, nclr))
        c.out(s)
    c.out(carry)
    return c


def sequence_detector():
    # detector for 1011 with overlap, binary-coded state
    c = Circuit("seqdet")
    x = c.inp("x")
    s0, s1 = c.dff("st0"), c.dff("st1")
    nx = c.gate("NOT", x)
    n0, n1 = c.gate("NOT", s0), c.gate("NOT", s1)
    # states: 00 idle, 01 got1, 10 got10, 11 got101
    a = c.gate("AND", s0, n1, nx)  # 01 --0--> 10
    b = c.gate("AND", s1, n0, x)  # 10 --1--> 11
    d = c.gate("AND", s1, s0, nx)  # 11 --0--> 10
    next1 = c.gate("OR", a, b, d)
    e = c.gate("AND", n1, x)  # 00/01 --1--> 01
    next0 = c.gate("OR", e, b)
    c.close(s0, next0)
    c.close(s1, next1)
    c.out(c.gate("AND", s1, s0, x, name="hit"))
    return c


def suite():
    return [
        rca(8),
        array_multiplier(4, "mult4"),
        comparator(8),
        alu(4),
        parity_chain(16),
        decoder(4),
        mux(3),
        counter(8),
        lfsr(8),
        accumulator(4),
        sequence_detector(),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "benchmarks"))
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    (out / "large").mkdir(parents=True, exist_ok=True)
    (out / "c17.bench").write_text(C17)
    (out / "s27.bench").write_text(S27)
    for c in suite():
        (out / f"{c.name}.bench").write_text(c.text())
    big = array_multiplier(16, "mult16", nand_adders=True)
    (out / "large" / "mult16.bench").write_text(big.text())


if __name__ == "__main__":
    main()
