import numpy as np
import pytest

from polypdet.imaging import CircularMask


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def mask64():
    return CircularMask.for_shape((64, 64))


def mirror_convolve_2d(f, taps):
    """Brute-force 2D convolution with the outer-product kernel and mirrored
    borders (edge pixel not repeated). Independent oracle for the separable
    implementation."""
    half = (len(taps) - 1) // 2
    k2 = np.outer(taps, taps)
    padded = np.pad(f, half, mode="reflect")
    out = np.zeros_like(f, dtype=float)
    ny, nx = f.shape
    for di in range(len(taps)):
        for dj in range(len(taps)):
            out += k2[di, dj] * padded[di : di + ny, dj : dj + nx]
    return out


def flood_fill_components(s):
    """8-connected components by explicit flood fill; returns a list of
    frozensets of (row, col) pairs ordered by first row-major pixel."""
    s = np.asarray(s)
    ny, nx = s.shape
    visited = set()
    components = []
    for i in range(ny):
        for j in range(nx):
            if not s[i, j] or (i, j) in visited:
                continue
            stack = [(i, j)]
            visited.add((i, j))
            comp = []
            while stack:
                ci, cj = stack.pop()
                comp.append((ci, cj))
                for di in (-1, 0, 1):
                    for dj in (-1, 0, 1):
                        ni, nj = ci + di, cj + dj
                        if (
                            0 <= ni < ny
                            and 0 <= nj < nx
                            and s[ni, nj]
                            and (ni, nj) not in visited
                        ):
                            visited.add((ni, nj))
                            stack.append((ni, nj))
            components.append(frozenset(comp))
    return components


def smooth_positive_frame(rng, shape=(64, 64), base=120.0, amplitude=40.0):
    """Random smooth strictly positive frame on the [0, 255] scale."""
    from polypdet.imaging import gaussian_convolve

    field = gaussian_convolve(rng.standard_normal(shape), 3.0)
    field = field / np.abs(field).max()
    return base + amplitude * field
