"""svcsdk: a development kit for SDN/NFV network services.

Takes service descriptors through formal validation, catalogue reuse, signed
packaging, sandbox MANO emulation of custom control functions, and
regression-based VNF performance profiling.
"""

__version__ = "0.1.0"
