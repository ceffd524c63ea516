"""kurdocr: OCR tooling for historical Arabic-script Kurdish publications.

Preprocessing, page-to-line segmentation, ground-truth corpus
management, external OCR engine orchestration, accuracy evaluation, and
an HTTP service with a human annotation workflow.
"""

__version__ = "0.1.0"
