"""cubelab: cyclic hyperbolicity criteria and a finite median-geometry lab."""
__version__ = "0.1.0"
