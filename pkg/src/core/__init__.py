"""Ingestion, multifractal spectra, sliding-window engine and detector"""
