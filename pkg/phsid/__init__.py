VERSION = "2026.1"
