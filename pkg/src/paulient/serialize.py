"""Plain-text file formats for matrices, Clifford tableaux, and MPU tensors.

Matrix format (complex, row-major):
    line 1:  <rows> <cols>
    then one line per row with 2*cols floats: re im re im ...

Tableau format:
    line 1:  <n_qubits>
    2N lines of 2N bits (the symplectic matrix, rows = generator images)
    1 line of 2N bits (signs; 1 means the image carries -1)

MPU tensor format:
    line 1:  <chi>
    then chi*chi*2*2 complex entries as "re im" pairs, row-major over
    (left, right, out, in), any line breaking.
"""

from __future__ import annotations

import numpy as np

from .mpu import MPUTensor
from .paulis import CliffordTableau


def save_matrix(path: str, m: np.ndarray) -> None:
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    with open(path, "w") as fh:
        fh.write(f"{m.shape[0]} {m.shape[1]}\n")
        for row in m:
            fh.write(" ".join(f"{e.real:.17g} {e.imag:.17g}" for e in row) + "\n")


def load_matrix(path: str) -> np.ndarray:
    with open(path) as fh:
        tokens = fh.read().split()
    rows, cols = int(tokens[0]), int(tokens[1])
    data = np.asarray([float(t) for t in tokens[2:]])
    if data.size != 2 * rows * cols:
        raise ValueError(f"expected {2 * rows * cols} floats in {path}, got {data.size}")
    return (data[0::2] + 1j * data[1::2]).reshape(rows, cols)


def tableau_to_text(c: CliffordTableau) -> str:
    lines = [str(c.n_qubits)]
    for row in c.mat:
        lines.append("".join(str(int(b)) for b in row))
    lines.append("".join(str(int(b)) for b in c.signs))
    return "\n".join(lines) + "\n"


def tableau_from_text(text: str) -> CliffordTableau:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    n = int(lines[0])
    if len(lines) != 2 + 2 * n:
        raise ValueError("tableau block has the wrong number of lines")
    mat = np.array([[int(ch) for ch in lines[1 + i]] for i in range(2 * n)], dtype=np.uint8)
    signs = np.array([int(ch) for ch in lines[1 + 2 * n]], dtype=np.uint8)
    return CliffordTableau(n, mat, signs)


def save_tableau(path: str, c: CliffordTableau) -> None:
    with open(path, "w") as fh:
        fh.write(tableau_to_text(c))


def load_tableau(path: str) -> CliffordTableau:
    with open(path) as fh:
        return tableau_from_text(fh.read())


def save_mpu(path: str, a: MPUTensor) -> None:
    flat = a.tensor.ravel()
    with open(path, "w") as fh:
        fh.write(f"{a.chi}\n")
        fh.write(" ".join(f"{e.real:.17g} {e.imag:.17g}" for e in flat) + "\n")


def load_mpu(path: str) -> MPUTensor:
    with open(path) as fh:
        tokens = fh.read().split()
    chi = int(tokens[0])
    data = np.asarray([float(t) for t in tokens[1:]])
    expected = 2 * chi * chi * 4
    if data.size != expected:
        raise ValueError(f"expected {expected} floats in {path}, got {data.size}")
    tensor = (data[0::2] + 1j * data[1::2]).reshape(chi, chi, 2, 2)
    return MPUTensor(chi=chi, tensor=tensor)
