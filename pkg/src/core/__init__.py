"""
Core numerical library and command service
"""

__all__ = ["EntanglementAnalyzer"]


def __getattr__(name):
    # the service imports the agents, which import this package
    if name == "EntanglementAnalyzer":
        from .entangler_service import EntanglementAnalyzer
        return EntanglementAnalyzer
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
