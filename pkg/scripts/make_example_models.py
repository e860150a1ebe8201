"""Regenerate the bundled example models in src/sddisc/data/.

G_elliptic.json: 6th-order elliptic low-pass (3 dB ripple, 50 dB stopband,
cut-off 1 rad/s) from its factored coefficients, in controllable canonical
form. F_lowpass3.json: 1/(s+1)^3.
"""

from pathlib import Path

import numpy as np
from scipy.signal import tf2ss

from sddisc.lti import StateSpaceModel, save_model

DATA = Path(__file__).resolve().parents[1] / "src" / "sddisc" / "data"

GAIN = 0.0031623
ZEROS_SQ = [1.33, 1.899, 10.31]  # s^2 + a
POLES_2ND = [(0.3705, 0.1681), (0.1596, 0.7062), (0.03557, 0.9805)]  # s^2 + b s + c


def elliptic_tf():
    num = np.array([GAIN])
    for a in ZEROS_SQ:
        num = np.polymul(num, [1.0, 0.0, a])
    den = np.array([1.0])
    for b, c in POLES_2ND:
        den = np.polymul(den, [1.0, b, c])
    return num, den


def main():
    num, den = elliptic_tf()
    G = StateSpaceModel(*tf2ss(num, den))
    F = StateSpaceModel(*tf2ss([1.0], np.poly([-1.0, -1.0, -1.0])))
    save_model(G, DATA / "G_elliptic.json")
    save_model(F, DATA / "F_lowpass3.json")


if __name__ == "__main__":
    main()
