"""The QMT signature for MMT-style formal libraries."""
