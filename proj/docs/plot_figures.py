#!/usr/bin/env python3
"""Regenerate the figure data with the mathieu CLI and plot it.

usage: python3 docs/plot_figures.py [--bin build/tools/mathieu] [--out figures] [N ...]
"""
import argparse
import csv
import io
import json
import math
import subprocess
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

BIN = "build/tools/mathieu"


def cli(*args):
    r = subprocess.run([BIN, *map(str, args)], capture_output=True, text=True, check=True)
    return r.stdout


def rows(*args):
    return [{k: float(v) for k, v in r.items()} for r in csv.DictReader(io.StringIO(cli(*args)))]


def col(rs, key):
    return np.array([r[key] for r in rs])


def conic(omega1, eps, order=10, x0=0.0, y0=1.0):
    c = json.loads(cli("build-integral", "--omega1", omega1, "--order", order, "--grid", f"{eps}:{eps}:1"))["conic"][0]
    return c["A"], c["B"], c["D"], c["A"] * x0 * x0 + c["B"] * y0 * y0 + 2 * c["D"] * x0 * y0


def draw_conic(ax, A, B, D, level, s_max=4.0, **kw):
    # x^T Q x = level, through the eigenbasis of Q
    lam, vec = np.linalg.eigh(np.array([[A, D], [D, B]]))
    if lam[0] * lam[1] > 0:
        th = np.linspace(0, 2 * np.pi, 400)
        u = np.stack([np.cos(th) * math.sqrt(level / lam[0]), np.sin(th) * math.sqrt(level / lam[1])])
        p = vec @ u
        ax.plot(p[0], p[1], **kw)
        return
    s = np.linspace(-s_max, s_max, 400)
    i, j = (0, 1) if level / lam[0] > 0 else (1, 0)
    for sign in (1, -1):
        u = np.zeros((2, s.size))
        u[i] = sign * math.sqrt(level / lam[i]) * np.cosh(s)
        u[j] = math.sqrt(-level / lam[j]) * np.sinh(s)
        p = vec @ u
        ax.plot(p[0], p[1], **kw)
        kw.pop("label", None)


def section(eps, omega1="9/10", periods=200, x0=0, y0=1):
    return rows("section", "--omega1", omega1, "--epsilon", eps, "--periods", periods, "--x0", x0, "--y0", y0)


def fig_sections(eps_list, omega1="9/10", periods=200, ics=((0, 1),), numbered=None):
    fig, ax = plt.subplots()
    for e in eps_list:
        for x0, y0 in ics:
            s = section(e, omega1, periods, x0, y0)
            ax.plot(col(s, "x"), col(s, "y"), ".", ms=2, label=f"eps={e} ({x0},{y0})")
            if e == numbered:
                for r in s[:12]:
                    ax.annotate(str(int(r["k"])), (r["x"], r["y"]), fontsize=7)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.legend(fontsize=6)
    return fig


def fig_orbit(eps, periods, omega1="9/10"):
    tr = rows("orbit", "--omega1", omega1, "--epsilon", eps, "--periods", periods, "--samples", 60)
    sec = [r for r in tr if abs(r["t"] / (math.pi) - round(r["t"] / math.pi)) < 1e-9]
    fig, ax = plt.subplots()
    ax.plot(col(tr, "x"), col(tr, "y"), lw=0.4)
    ax.plot(col(sec, "x"), col(sec, "y"), "r.", ms=4)
    ax.set_title(f"eps={eps}, {periods} periods")
    return fig


def fig1():
    return fig_sections([0.1], ics=((0, 1), (0, 0.7), (0, 0.4), (0.5, 0)))


def fig2():
    return fig_sections([0.0, 0.05, 0.1, 0.15, 0.18], numbered=0.1)


def fig3():
    fig, axes = plt.subplots(1, 2, figsize=(10, 5))
    for ax, eps, n in ((axes[0], 0.1, 13), (axes[1], 0.18, 39)):
        s = section(eps, periods=n + 1)
        ax.plot(col(s, "x"), col(s, "y"), "k.-", lw=0.5)
        for order in (2, 4, 6, 10, 20, 28):
            draw_conic(ax, *conic("9/10", eps, order), lw=0.7, label=f"S={order}")
        ax.set_title(f"eps={eps}")
        ax.legend(fontsize=6)
    return fig


def fig4():
    fig, ax = plt.subplots()
    for e in (0.05, 0.1, 0.15, 0.18, 0.185):
        d = rows("distances", "--epsilon", e, "--time", 200)
        ax.plot(col(d, "t"), col(d, "d"), ".-", ms=2, lw=0.4, label=f"eps={e}")
    ax.set_xlabel("t")
    ax.set_ylabel("d")
    ax.legend(fontsize=6)
    return fig


def fig5():
    return fig_orbit(0.185, 110)


def fig6():
    # refined period-17 orbit (eps from the rotation-angle refiner)
    return fig_orbit(0.150003401047, 17)


def fig7():
    return fig_orbit(0.19, 40)


def fig8():
    fig, ax = plt.subplots()
    for e in (0.19, 0.2, 0.22, 0.25):
        d = rows("distances", "--epsilon", e, "--periods", 30)
        ax.plot(col(d, "k"), np.log(col(d, "r")), ".-", label=f"eps={e}")
    ax.set_xlabel("k")
    ax.set_ylabel("log r")
    ax.legend(fontsize=6)
    return fig


def fig9():
    fig, axes = plt.subplots(1, 2, figsize=(10, 5))
    for ax, eps, n in ((axes[0], 0.18, 41), (axes[1], 0.19, 40)):
        tr = rows("energy", "--epsilon", eps, "--periods", n, "--samples", 40)
        s = section(eps, periods=n)
        ax.plot(col(tr, "x"), col(tr, "E"), lw=0.4)
        ax.plot(col(s, "x"), col(s, "E"), "b.", ms=4)
        ax.set_title(f"eps={eps}")
    return fig


def fig10():
    return fig_sections([-0.05, -0.1, -0.15, -0.18], numbered=-0.18)


def fig11():
    return fig_orbit(-0.185, 110)


def fig12():
    return fig_orbit(-0.19, 20)


def fig13():
    return fig_sections([0.1, 0.3, 0.5, 0.7, 0.85, 0.899], omega1="1/10", numbered=0.1)


def fig14():
    fig, axes = plt.subplots(1, 2, figsize=(10, 5))
    fig_pos = [0.05, 0.1, 0.15, 0.2]
    for ax, eps_list in ((axes[0], fig_pos), (axes[1], [-e for e in fig_pos])):
        for e in eps_list:
            s = section(e, omega1="11/10")
            ax.plot(col(s, "x"), col(s, "y"), ".", ms=2, label=f"eps={e}")
        ax.legend(fontsize=6)
    return fig


def fig15():
    fig, axes = plt.subplots(1, 2, figsize=(10, 5))
    for eps, color in ((0.05, "b"), (0.15, "r")):
        tr = rows("orbit", "--omega1", 1, "--epsilon", eps, "--periods", 15, "--samples", 40)
        axes[0].plot(col(tr, "x"), col(tr, "y"), color, lw=0.4)
        rep = json.loads(cli("resonant", "--omega1", 1, "--epsilon", eps))
        c = rep["Cbar_str"]
        draw_conic(axes[1], c["A"], c["B"], c["D"], rep["level"], color=color, lw=0.7)
        s = rows("section", "--omega1", 1, "--epsilon", eps, "--periods", 15)
        axes[1].plot(col(s, "x"), col(s, "y"), color + ".", ms=5)
    axes[1].set_xlim(-6, 6)
    axes[1].set_ylim(-6, 6)
    return fig


FIGURES = {i: globals()[f"fig{i}"] for i in range(1, 16)}


def main():
    global BIN
    ap = argparse.ArgumentParser()
    ap.add_argument("--bin", default=BIN)
    ap.add_argument("--out", default="figures")
    ap.add_argument("which", nargs="*", type=int)
    a = ap.parse_args()
    BIN = a.bin
    out = Path(a.out)
    out.mkdir(exist_ok=True)
    for i in a.which or FIGURES:
        fig = FIGURES[i]()
        fig.savefig(out / f"fig{i:02d}.png", dpi=120)
        plt.close(fig)
        print(out / f"fig{i:02d}.png")


if __name__ == "__main__":
    main()
