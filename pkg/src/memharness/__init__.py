"""Multi-agent memory testbed: load conversations into pluggable memory
backends, answer benchmark questions over an impaired network, and account
for every token, byte, CPU minute and dollar along the way."""

__version__ = "0.1.0"
