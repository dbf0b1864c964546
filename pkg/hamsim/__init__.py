# hamsim: Hamiltonian evolution kernels and benchmark harness
__version__ = "0.1.0"
