"""Workflow object model, Taverna dialect parsing/writing and shim pruning."""
