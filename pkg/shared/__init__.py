"""
Resource leak analysis engine and helpers shared by the Azure Functions and the CLI
"""
