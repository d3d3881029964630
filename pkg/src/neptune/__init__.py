"""Near-drowning struggle detection on short pool video windows."""
