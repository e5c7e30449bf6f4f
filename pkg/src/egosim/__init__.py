"""egosim: script-to-video synthesis and evaluation for egocentric assistance scenarios.

The package is organized around three layers:

* generation: a five-step, schema-validated script pipeline (``pipeline``)
  driving pluggable model backends (``gateway``) into rendered videos
  (``synthesis``);
* evaluation: physical signals from segmentation traces (``trace``),
  semantic VLM/judge parsing (``semantic``), and utility fusion
  (``scoring``);
* reporting and access: aggregate tables (``reporting``), an HTTP service
  (``service``) and a CLI (``cli``).
"""

__version__ = "0.1.0"
