"""Federated RUL training simulator with quantized update exchange.

Subpackages/modules:
    data        C-MAPSS ingestion, normalization, sliding windows
    nn          dense 1-D CNN kernels (numba-accelerated with numpy fallback)
    quantize    symmetric uniform delta quantization + wire format
    partition   Non-IID / IID client partitions and label-EMD reporting
    fedsim      synchronous FedAvg orchestration
    stats       MAE, asymmetric RUL score, paired t-test machinery
    fpga        analytical FPGA resource and LoRaWAN link projections
    cli         subcommand front end (run / report / plot / ...)
"""

__version__ = "0.1.0"
