"""Adversarial coupon-collector models of botnet reconnaissance against rotating proxies."""

__version__ = "0.1.0"
