"""Optimal and greedy amplify-and-forward scaling for Gaussian layered relay networks."""
