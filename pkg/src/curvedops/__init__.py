"""curvedops: exact symbolic calculus for curved operads over complete
filtered graded modules.

Modules
-------
filtcomplex   filtered graded modules, predifferentials, gr-homology
planartree    planar rooted trees, grafting, splitting combinatorics
operadcore    free and presented curved operads, endomorphism operads
cooperadcore  tree cooperads, coderivations, kernel subcooperads
barcobar      bar and cobar constructions, convolution algebras
koszul        Koszul duality data and curved homotopy-associative algebras
cli           command-line entry points
"""

__version__ = "0.1.0"
