"""Hard-core bosons on dimerized Rydberg chains: geometry, exact many-body
dynamics, read-out noise and the symmetry classification of the ground states."""

__version__ = "0.1.0"
