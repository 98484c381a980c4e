"""sptquench: quench dynamics and rigorous entanglement-gap bounds for 1D
symmetry-protected-topological systems.

Free-fermion quenches are handled through Bloch Hamiltonians and Fermi
projectors (:mod:`sptquench.freefermion`, :mod:`sptquench.lrbounds`),
interacting ones through uniform matrix-product states and unitaries
(:mod:`sptquench.mps`, :mod:`sptquench.mpu`, :mod:`sptquench.channelbounds`).
:mod:`sptquench.models` holds the model zoo, :mod:`sptquench.experiments`
the seeded experiment drivers, and :mod:`sptquench.cli` the command-line
runner.
"""

__version__ = "0.1.0"
