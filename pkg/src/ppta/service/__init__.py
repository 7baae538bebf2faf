"""HTTP service wrapping the checker."""
