"""
Noisy Exchange Entangler - Source Package
"""

__version__ = "1.0.0"
__author__ = "Noisy Exchange Entangler Team"
__description__ = "Entanglement of two qubits under noisy exchange gates"
