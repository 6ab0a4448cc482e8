"""Link-level NOMA simulator for quantized feature transmission."""

__version__ = "0.1.0"
