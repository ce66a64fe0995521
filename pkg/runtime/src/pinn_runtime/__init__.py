"""pinn-runtime: renders program bundles into runnable torch training scripts."""

__version__ = "0.1.0"
