"""Plane-wave reflectance and fields of planar stratified media via 2x2
characteristic matrices, with an independent recursive oracle.

Conventions, fixed once for the whole package:

* time dependence exp(-i w t); passive media have Im(eps) >= 0
* the z axis points from the prism into the sensing medium and the
  prism / first-layer interface sits at z = 0
* kx is the transverse wavevector in units of the vacuum wavenumber
  k0 = 2 pi / lambda, i.e. kx = n_prism * sin(theta); it is conserved
  through the stack
* every medium has normalized kz = sqrt(eps - kx**2) on the branch
  Im(kz) >= 0, so evanescent waves decay along +z
* admittance q = kz / eps for p (TM) polarization, q = kz for s (TE);
  a layer of thickness d contributes the unimodular matrix
  [[cos b, -i sin b / q], [-i q sin b, cos b]] with b = k0 d kz
* angles are degrees at every public boundary and radians inside;
  lengths are nm

Surface plasmons couple to p polarization only; s is provided for the
energy-conservation checks. ``parratt_reflectance`` recomputes R by
bottom-up recursive Fresnel composition and shares nothing with the
matrix path except ``fresnel_coefficient``; the test suite holds the two
routes to 1e-10 agreement.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .materials import Material, refractive_index_at, permittivity_at

_POLARIZATIONS = ("p", "s")


def _check_polarization(polarization):
    if polarization not in _POLARIZATIONS:
        raise ValueError(f"polarization must be 'p' or 's', got {polarization!r}")


def _check_theta(theta_deg):
    if not 0.0 <= theta_deg < 90.0:
        raise ValueError(f"incidence angle must lie in [0, 90) degrees, got {theta_deg}")


def _kz(eps, kx):
    """Normalized kz = sqrt(eps - kx**2), branch Im(kz) >= 0."""
    w = np.sqrt(np.asarray(eps - np.asarray(kx, dtype=complex) ** 2, dtype=complex))
    return np.where(w.imag < 0, -w, w)


def admittance(eps, kx, polarization="p"):
    """Optical admittance of a medium at transverse wavevector kx."""
    _check_polarization(polarization)
    kz = _kz(eps, kx)
    return kz / eps if polarization == "p" else kz


def fresnel_coefficient(eps_i, eps_j, kx, polarization="p"):
    """Amplitude reflection of the single interface from medium i to j.

    Total internal reflection is not an error; it simply yields |r| = 1.
    """
    qi = admittance(eps_i, kx, polarization)
    qj = admittance(eps_j, kx, polarization)
    r = (qi - qj) / (qi + qj)
    return complex(r) if r.ndim == 0 else r


def layer_phase(eps, thickness_nm, wavelength_nm, kx):
    """Phase thickness b = (2 pi d / lambda) * sqrt(eps - kx**2)."""
    if thickness_nm < 0:
        raise ValueError("thickness must be >= 0")
    beta = (2.0 * np.pi * thickness_nm / wavelength_nm) * _kz(eps, kx)
    return complex(beta) if beta.ndim == 0 else beta


@dataclass(frozen=True)
class Layer:
    """One finite film: a material plus its thickness in nm.

    Zero thickness is representable (it must be reflectance-neutral and
    is exercised by the invariance tests) but stack documents require
    strictly positive thicknesses.
    """

    material: Material
    thickness_nm: float

    def __post_init__(self):
        d = self.thickness_nm
        if not (np.isfinite(d) and d >= 0):
            raise ValueError(f"layer '{self.material.name}': thickness must be finite and >= 0")


@dataclass(frozen=True)
class Stack:
    """Prism (semi-infinite) / finite layers / sensing medium (semi-infinite).

    The prism must be lossless at the working wavelength and the sensing
    medium is a real index >= 1. Construction validates that every
    referenced material covers ``wavelength_nm``.
    """

    prism: Material
    layers: tuple[Layer, ...]
    sensing_index: float
    wavelength_nm: float

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if not (np.isfinite(self.wavelength_nm) and self.wavelength_nm > 0):
            raise ValueError("wavelength must be finite and positive")
        if not (np.isfinite(self.sensing_index) and self.sensing_index >= 1.0):
            raise ValueError("sensing index must be real and >= 1")
        prism_index = refractive_index_at(self.prism, self.wavelength_nm)
        if prism_index.imag != 0.0:
            raise ValueError(
                f"prism '{self.prism.name}' must be lossless at {self.wavelength_nm} nm"
            )
        for layer in self.layers:
            refractive_index_at(layer.material, self.wavelength_nm)

    @property
    def prism_index(self) -> float:
        return refractive_index_at(self.prism, self.wavelength_nm).real

    @property
    def total_thickness_nm(self) -> float:
        return float(sum(layer.thickness_nm for layer in self.layers))


@dataclass(frozen=True)
class ReflectanceCurve:
    """Angular reflectance samples on a uniform, strictly increasing grid."""

    wavelength_nm: float
    theta_deg: np.ndarray
    reflectance: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta_deg, dtype=float)
        refl = np.asarray(self.reflectance, dtype=float)
        if theta.ndim != 1 or theta.shape != refl.shape or theta.size == 0:
            raise ValueError("theta and reflectance must be matching 1-D arrays")
        if theta.size > 1:
            steps = np.diff(theta)
            if not (steps > 0).all():
                raise ValueError("theta samples must be strictly increasing")
            if np.abs(steps - steps.mean()).max() > 1e-9:
                raise ValueError("theta grid must be uniform to 1e-9 degrees")
        if refl.min() < 0 or refl.max() > 1 + 1e-12:
            raise ValueError("reflectance values must lie in [0, 1 + 1e-12]")
        theta.setflags(write=False)
        refl.setflags(write=False)
        object.__setattr__(self, "theta_deg", theta)
        object.__setattr__(self, "reflectance", refl)

    @property
    def step_deg(self) -> float:
        if self.theta_deg.size < 2:
            return 0.0
        return float((self.theta_deg[-1] - self.theta_deg[0]) / (self.theta_deg.size - 1))


@dataclass(frozen=True)
class FieldProfile:
    """|H_y(z)| for unit incident amplitude on a uniform z grid.

    ``layer_index`` is -1 in the prism, 0..N-1 in the finite layers and N
    in the sensing medium.
    """

    wavelength_nm: float
    theta_deg: float
    z_nm: np.ndarray
    layer_index: np.ndarray
    magnitude: np.ndarray


def _layer_elements(eps, thickness_nm, wavelength_nm, kx, polarization):
    """Elements (m11, m12, m21, m22) of one characteristic matrix."""
    kz = _kz(eps, kx)
    beta = (2.0 * np.pi * thickness_nm / wavelength_nm) * kz
    q = kz / eps if polarization == "p" else kz
    c = np.cos(beta)
    s = np.sin(beta)
    return c, -1j * s / q, -1j * q * s, c


def characteristic_matrix(layer: Layer, wavelength_nm, kx, polarization="p"):
    """2x2 characteristic (Abeles) matrix of one layer; det = 1."""
    _check_polarization(polarization)
    eps = permittivity_at(layer.material, wavelength_nm)
    m11, m12, m21, m22 = _layer_elements(
        eps, layer.thickness_nm, wavelength_nm, complex(kx), polarization
    )
    return np.array([[m11, m12], [m21, m22]], dtype=complex)


def _stack_elements(stack: Stack, theta_rad, polarization):
    """Total matrix elements and closing admittances on an angle grid."""
    wavelength = stack.wavelength_nm
    n_p = stack.prism_index
    kx = n_p * np.sin(np.asarray(theta_rad, dtype=float))
    shape = kx.shape
    m11 = np.ones(shape, dtype=complex)
    m22 = np.ones(shape, dtype=complex)
    m12 = np.zeros(shape, dtype=complex)
    m21 = np.zeros(shape, dtype=complex)
    for layer in stack.layers:
        eps = permittivity_at(layer.material, wavelength)
        a11, a12, a21, a22 = _layer_elements(
            eps, layer.thickness_nm, wavelength, kx, polarization
        )
        m11, m12, m21, m22 = (
            m11 * a11 + m12 * a21,
            m11 * a12 + m12 * a22,
            m21 * a11 + m22 * a21,
            m21 * a12 + m22 * a22,
        )
    q_in = admittance(complex(n_p * n_p), kx, polarization)
    q_out = admittance(complex(stack.sensing_index**2), kx, polarization)
    return m11, m12, m21, m22, q_in, q_out


def _amplitude_from_elements(m11, m12, m21, m22, q_in, q_out):
    a = m11 + m12 * q_out
    b = m21 + m22 * q_out
    return (q_in * a - b) / (q_in * a + b)


def reflection_from_matrix(matrix, q_in, q_out) -> complex:
    """Amplitude reflection of a total transfer matrix closed by admittances."""
    m = np.asarray(matrix, dtype=complex)
    return complex(_amplitude_from_elements(m[0, 0], m[0, 1], m[1, 0], m[1, 1], q_in, q_out))


def total_matrix(stack: Stack, theta_deg, polarization="p"):
    """Ordered product of the layer matrices, prism side first."""
    _check_polarization(polarization)
    _check_theta(theta_deg)
    m11, m12, m21, m22, _, _ = _stack_elements(
        stack, np.deg2rad(np.asarray([theta_deg], dtype=float)), polarization
    )
    return np.array([[m11[0], m12[0]], [m21[0], m22[0]]], dtype=complex)


def stack_reflection(stack: Stack, theta_deg, polarization="p") -> complex:
    """Complex amplitude reflection of the full stack at one angle."""
    _check_polarization(polarization)
    _check_theta(theta_deg)
    r = _amplitude_from_elements(
        *_stack_elements(stack, np.deg2rad(np.asarray([theta_deg], dtype=float)), polarization)
    )
    return complex(r[0])


def _clamp_reflectance(values):
    # benign fp overshoot above 1 (within 1e-12) is reported as exactly 1
    return np.where(values <= 1.0 + 1e-12, np.minimum(values, 1.0), values)


def reflectance(stack: Stack, theta_deg) -> float:
    """p-polarized power reflectance R = |r|**2 at one angle."""
    r = stack_reflection(stack, theta_deg, "p")
    return float(_clamp_reflectance(abs(r) ** 2))


def transmittance(stack: Stack, theta_deg, polarization="p") -> float:
    """Power transmittance into the sensing medium at one angle."""
    _check_polarization(polarization)
    _check_theta(theta_deg)
    m11, m12, m21, m22, q_in, q_out = _stack_elements(
        stack, np.deg2rad(np.asarray([theta_deg], dtype=float)), polarization
    )
    t = 2.0 * q_in / (q_in * (m11 + m12 * q_out) + (m21 + m22 * q_out))
    flux = q_out.real / q_in.real
    return float((flux * np.abs(t) ** 2)[0])


def angular_sweep(stack: Stack, theta_min, theta_max, step) -> ReflectanceCurve:
    """Inclusive uniform sweep of R_p over [theta_min, theta_max]."""
    if step <= 0:
        raise ValueError("sweep step must be positive")
    if not theta_min < theta_max:
        raise ValueError("empty angular range: theta_min must be < theta_max")
    if theta_min < 0 or theta_max >= 90:
        raise ValueError("sweep window must lie within [0, 90) degrees")
    count = int(np.floor((theta_max - theta_min) / step + 1e-9)) + 1
    theta = theta_min + step * np.arange(count)
    r = _amplitude_from_elements(*_stack_elements(stack, np.deg2rad(theta), "p"))
    return ReflectanceCurve(
        wavelength_nm=stack.wavelength_nm,
        theta_deg=theta,
        reflectance=_clamp_reflectance(np.abs(r) ** 2),
    )


def parratt_reflectance(stack: Stack, theta_deg, polarization="p") -> float:
    """p-polarized reflectance by bottom-up recursive Fresnel composition.

    Independent oracle for :func:`reflectance`: scalar cmath arithmetic,
    no code shared with the matrix path beyond ``fresnel_coefficient``.
    """
    _check_polarization(polarization)
    _check_theta(theta_deg)
    wavelength = stack.wavelength_nm
    n_p = stack.prism_index
    kx = n_p * math.sin(math.radians(theta_deg))
    eps = [complex(n_p * n_p)]
    eps += [permittivity_at(layer.material, wavelength) for layer in stack.layers]
    eps.append(complex(stack.sensing_index**2))
    k0 = 2.0 * cmath.pi / wavelength
    r = fresnel_coefficient(eps[-2], eps[-1], kx, polarization)
    for j in range(len(stack.layers) - 1, -1, -1):
        kz = cmath.sqrt(eps[j + 1] - kx * kx)
        if kz.imag < 0:
            kz = -kz
        phase = cmath.exp(2j * k0 * stack.layers[j].thickness_nm * kz)
        r_j = fresnel_coefficient(eps[j], eps[j + 1], kx, polarization)
        r = (r_j + r * phase) / (1 + r_j * r * phase)
    return float(_clamp_reflectance(abs(r) ** 2))


def _field_regions(stack: Stack, theta_deg: float):
    """Per-region H_y amplitudes: (z_lo, z_hi, index, A, B, kz, z_ref).

    H_y(z) = A exp(i k0 kz (z - z_ref)) + B exp(-i k0 kz (z - z_ref))
    inside each region, with the same matrices as the reflectance path,
    so |H_y| is continuous at every interface by construction.
    """
    theta_rad = np.deg2rad(theta_deg)
    wavelength = stack.wavelength_nm
    n_p = stack.prism_index
    kx = complex(n_p * np.sin(theta_rad))
    r = stack_reflection(stack, theta_deg, "p")

    eps_in = complex(n_p * n_p)
    q_in = complex(admittance(eps_in, kx, "p"))
    regions = [(-np.inf, 0.0, -1, 1.0 + 0j, r, complex(_kz(eps_in, kx)), 0.0)]

    u = 1.0 + r
    v = q_in * (1.0 - r)
    z_top = 0.0
    for index, layer in enumerate(stack.layers):
        eps = permittivity_at(layer.material, wavelength)
        kz = complex(_kz(eps, kx))
        q = kz / eps
        a = 0.5 * (u + v / q)
        b = 0.5 * (u - v / q)
        d = layer.thickness_nm
        regions.append((z_top, z_top + d, index, a, b, kz, z_top))
        phase = cmath.exp(1j * (2.0 * cmath.pi / wavelength) * kz * d)
        u = a * phase + b / phase
        v = q * (a * phase - b / phase)
        z_top += d

    eps_out = complex(stack.sensing_index**2)
    kz_out = complex(_kz(eps_out, kx))
    regions.append((z_top, np.inf, len(stack.layers), u, 0.0 + 0j, kz_out, z_top))
    return regions


def field_magnitude(stack: Stack, theta_deg: float, z_nm) -> np.ndarray:
    """|H_y| at arbitrary depths z_nm (vectorized), unit incident amplitude."""
    z = np.asarray(z_nm, dtype=float)
    k0 = 2.0 * np.pi / stack.wavelength_nm
    out = np.empty(z.shape, dtype=float)
    for z_lo, z_hi, _, a, b, kz, z_ref in _field_regions(stack, theta_deg):
        mask = (z >= z_lo) & (z < z_hi) if np.isfinite(z_hi) else (z >= z_lo)
        if not mask.any():
            continue
        local = z[mask] - z_ref
        phase = np.exp(1j * k0 * kz * local)
        out[mask] = np.abs(a * phase + b / phase)
    return out


def field_profile(stack: Stack, theta_deg: float, resolution_nm: float) -> FieldProfile:
    """|H_y(z)| sampled from 200 nm inside the prism to 500 nm into the medium."""
    _check_theta(theta_deg)
    if resolution_nm <= 0:
        raise ValueError("resolution must be positive")
    total = stack.total_thickness_nm
    count = int(np.floor((total + 700.0) / resolution_nm + 1e-9)) + 1
    z = -200.0 + resolution_nm * np.arange(count)
    boundaries = np.concatenate(
        ([0.0], np.cumsum([layer.thickness_nm for layer in stack.layers]))
    )
    layer_index = np.searchsorted(boundaries, z, side="right") - 1
    return FieldProfile(
        wavelength_nm=stack.wavelength_nm,
        theta_deg=float(theta_deg),
        z_nm=z,
        layer_index=layer_index,
        magnitude=field_magnitude(stack, theta_deg, z),
    )
