"""Regenerate the least-asymmetric Daubechies lowpass taps in extended precision.

Spectral factorisation of the Daubechies half-band polynomial, evaluated with
mpmath at 60 digits. Among the admissible root selections, the one matching the
PyWavelets `symN` tables (to their ~1e-12 accuracy) is kept, so the output is
the same filter bank, correctly rounded to double precision.
"""
import itertools

import mpmath as mp
import numpy as np
import pywt

mp.mp.dps = 60


def candidates(n):
    p = [mp.binomial(n - 1 + k, k) for k in range(n)]
    yroots = mp.polyroots(list(reversed(p)), maxsteps=200, extraprec=200) if n > 1 else []
    pairs = []
    for y in yroots:
        b = 2 - 4 * y
        disc = mp.sqrt(b * b - 4)
        z1, z2 = (b + disc) / 2, (b - disc) / 2
        pairs.append((z1, z2))
    # group conjugate y-roots so that real taps result
    groups, used = [], set()
    for i, y in enumerate(yroots):
        if i in used:
            continue
        if abs(mp.im(y)) < mp.mpf(10) ** -40:
            groups.append([i])
            used.add(i)
        else:
            j = min((k for k in range(len(yroots)) if k not in used and k != i),
                    key=lambda k: abs(yroots[k] - mp.conj(y)))
            groups.append([i, j])
            used.update([i, j])
    for choice in itertools.product([0, 1], repeat=len(groups)):
        zs = []
        for g, c in zip(groups, choice):
            for idx in g:
                z1, z2 = pairs[idx]
                a, b = (z1, z2) if abs(z1) <= abs(z2) else (z2, z1)
                pick = a if c == 0 else b
                if len(g) == 2 and idx == g[1]:
                    first = zs[-1]
                    pick = min((z1, z2), key=lambda z: abs(z - mp.conj(first)))
                zs.append(pick)
        poly = [mp.mpf(1)]
        for _ in range(n):
            poly = np.convolve(poly, [mp.mpf(1), mp.mpf(1)]).tolist()
        for z in zs:
            poly = np.convolve(poly, [mp.mpf(1), -z]).tolist()
        taps = [mp.re(c) for c in poly]
        s = sum(taps)
        taps = [t * mp.sqrt(2) / s for t in taps]
        yield taps


def main():
    for n in range(2, 11):
        ref = np.array(pywt.Wavelet("sym%d" % n).dec_lo)
        best, err = None, 1.0
        for taps in candidates(n):
            t = np.array([float(x) for x in taps])
            for cand in (t, t[::-1]):
                e = np.max(np.abs(cand - ref))
                if e < err:
                    best, err = (taps if cand is t else list(reversed(taps))), e
        assert err < 1e-9, (n, err)
        print("    // N = %d" % n)
        print("    &[")
        for x in best:
            print("        %s," % mp.nstr(x, 20, min_fixed=-30, max_fixed=30))
        print("    ],")


if __name__ == "__main__":
    main()
