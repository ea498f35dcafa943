"""Reference values for the golden tests, computed with plain numpy.

Run from this directory: python3 gen_golden.py > golden.json
"""
import json

import numpy as np

C = 299792458.0
EPS = 8.8541878128e-12
MU = 1.25663706212e-6
FREQ = 30e9
LAM = C / FREQ
K0 = 2 * np.pi / LAM
NODES = 16


def unit(theta, phi):
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


def green(R):
    r = np.linalg.norm(R, axis=-1)
    kr = K0 * r
    a = 1 + 1j / kr - 1 / kr**2
    b = 3 / kr**2 - 3j / kr - 1
    rh = R / r[..., None]
    out = b[..., None, None] * rh[..., :, None] * rh[..., None, :] + a[..., None, None] * np.eye(3)
    return out * (np.exp(1j * kr) / (4 * np.pi * r))[..., None, None]


def amplitude(R):
    return green(R[None])[0] * np.exp(-1j * K0 * np.linalg.norm(R))


def frames(center, angles, nh, nv, ph, pv):
    dh, dv = unit(angles[0], angles[2]), unit(angles[1], angles[3])
    centers = [center + (i - (nh - 1) / 2) * ph * dh + (j - (nv - 1) / 2) * pv * dv
               for i in range(nh) for j in range(nv)]
    return np.array(centers), dh, dv, ph, pv


def offsets(dh, dv, lh, lv):
    xh, wh = np.polynomial.legendre.leggauss(NODES)
    off = (xh[:, None, None] * lh / 2 * dh + xh[None, :, None] * lv / 2 * dv).reshape(-1, 3)
    w = (wh[:, None] * wh[None, :]).reshape(-1) * lh * lv / 4
    return off, w


def exact(tx, rx):
    ct, dht, dvt, lht, lvt = tx
    cr, dhr, dvr, lhr, lvr = rx
    ot, wt = offsets(dht, dvt, lht, lvt)
    orr, wr = offsets(dhr, dvr, lhr, lvr)
    W = wr[:, None] * wt[None, :]
    H = np.zeros((3 * len(cr), 3 * len(ct)), complex)
    for m in range(len(cr)):
        for n in range(len(ct)):
            R = (cr[m] + orr)[:, None, :] - (ct[n] + ot)[None, :, :]
            H[3 * m:3 * m + 3, 3 * n:3 * n + 3] = -1j * EPS * MU * np.einsum("ab,abij->ij", W, green(R))
    return H


def approx(tx, rx, with_sinc):
    ct, dht, dvt, lht, lvt = tx
    cr, dhr, dvr, lhr, lvr = rx
    H = np.zeros((3 * len(cr), 3 * len(ct)), complex)
    for m in range(len(cr)):
        for n in range(len(ct)):
            R = cr[m] - ct[n]
            u = R / np.linalg.norm(R)
            f = 1.0
            if with_sinc:
                for d, l in ((dht, lht), (dvt, lvt), (dhr, lhr), (dvr, lvr)):
                    f *= np.sinc(K0 * l / 2 * (u @ d) / np.pi)
            H[3 * m:3 * m + 3, 3 * n:3 * n + 3] = -1j * EPS * MU * lht * lvt * lhr * lvr * green(R[None])[0] * f
    return H


def nmse(a, b):
    return float(np.linalg.norm(a - b) ** 2 / np.linalg.norm(b) ** 2)


def cmat(m):
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def angles_of(dh, dv):
    def polar_azimuth(d):
        return float(np.arccos(d[2])), float(np.mod(np.arctan2(d[1], d[0]), 2 * np.pi))
    th, ph = polar_azimuth(dh)
    tv, pv = polar_azimuth(dv)
    return [th, tv, ph, pv]


BROADSIDE = [np.pi / 2, np.pi / 2, 0.0, np.pi / 2]


def tilted(deg):
    return [np.pi / 2, np.deg2rad(deg), 0.0, np.pi / 2]


def reference_setup(nh, mh, s, d, tilt):
    tx = frames(np.zeros(3), BROADSIDE, nh, nh, s, s)
    rx = frames(np.array([0.0, 0.0, d]), tilted(tilt), mh, mh, s, s)
    return tx, rx


out = {"frequency": FREQ, "wavelength": LAM}

r = np.array([3.0, -2.0, 4.0]) / np.sqrt(29.0) * 5 * LAM
out["amplitude"] = {"r": r.tolist(), "matrix": cmat(amplitude(r))}

# Generic orientations for both elements of one pair.
rng = np.random.default_rng(7)
def random_angles():
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    return angles_of(q[:, 0], q[:, 1])
ang_t, ang_r = random_angles(), random_angles()
ct = np.array([0.1, -0.2, 0.05]) * LAM
cr = ct + np.array([1.0, 2.0, 4.0]) / np.sqrt(21.0) * 5 * LAM
tx = frames(ct, ang_t, 1, 1, 0.05 * LAM, 0.07 * LAM)
rx = frames(cr, ang_r, 1, 1, 0.06 * LAM, 0.04 * LAM)
out["exact_pair"] = {
    "tx_center": ct.tolist(), "tx_angles": ang_t, "tx_lengths": [0.05 * LAM, 0.07 * LAM],
    "rx_center": cr.tolist(), "rx_angles": ang_r, "rx_lengths": [0.06 * LAM, 0.04 * LAM],
    "exact": cmat(exact(tx, rx)),
    "ca1": cmat(approx(tx, rx, True)),
    "ca2": cmat(approx(tx, rx, False)),
}

tx = frames(np.zeros(3), BROADSIDE, 1, 1, 0.5 * LAM, 0.5 * LAM)
rx = frames(np.array([0.3, 0.2, 2.0]) * LAM, tilted(60), 1, 1, 0.5 * LAM, 0.5 * LAM)
out["ca1_tilted_pair"] = {
    "rx_center": (np.array([0.3, 0.2, 2.0]) * LAM).tolist(),
    "ca1": cmat(approx(tx, rx, True)),
}

# Single-element surfaces, 0.05λ elements, RE 5λ above the TE, RE tilted to 60°.
tx = frames(np.zeros(3), BROADSIDE, 1, 1, 0.05 * LAM, 0.05 * LAM)
rx = frames(np.array([0.0, 0.0, 5.0 * LAM]), tilted(60), 1, 1, 0.05 * LAM, 0.05 * LAM)
out["pair_0.05lam_5lam_tilt60"] = {
    "exact": cmat(exact(tx, rx)),
    "ca1": cmat(approx(tx, rx, True)),
    "ca2": cmat(approx(tx, rx, False)),
}

mse = []
for d, tilt in ((1.0, 90.0), (10.0, 90.0), (1.0, 60.0)):
    tx, rx = reference_setup(9, 3, 0.05 * LAM, d * LAM, tilt)
    H = exact(tx, rx)
    mse.append({"distance_lam": d, "tilt_deg": tilt,
                "ca1": nmse(approx(tx, rx, True), H), "ca2": nmse(approx(tx, rx, False), H)})
out["mse"] = mse

tx, rx = reference_setup(9, 3, 0.05 * LAM, 0.1 * LAM, 90.0)
spectra = {}
for name, H in (("exact", exact(tx, rx)), ("ca1", approx(tx, rx, True)), ("ca2", approx(tx, rx, False))):
    sv = np.linalg.svd(H, compute_uv=False)
    spectra[name] = {"singular_values": sv.tolist(), "eigenmode_count": int(np.sum(sv >= 0.01 * sv[0]))}
out["spectrum_9x9_3x3_0.1lam"] = spectra

print(json.dumps(out, indent=1))
