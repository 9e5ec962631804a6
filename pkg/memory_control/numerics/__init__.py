"""Numerical core: kernels, convolution, spectra, modal solvers, the MacCamy transform and control."""

from memory_control.numerics.convolution import GREGORY, TRAPEZOID, QuadratureRule, convolve, get_rule, resolvent_kernel
from memory_control.numerics.field import SystemParams, free_evolution
from memory_control.numerics.kernels import ClosedForm, SampledKernel, TimeGrid
from memory_control.numerics.maccamy import FirstOrderProblem, SecondOrderSystem, maccamy_transform
from memory_control.numerics.signals import ControlBasis, ControlSignal
from memory_control.numerics.spectral import SpectralDomain, SpectralVector, interval_domain, rectangle_domain

__all__ = [
    "TimeGrid",
    "ClosedForm",
    "SampledKernel",
    "QuadratureRule",
    "TRAPEZOID",
    "GREGORY",
    "get_rule",
    "convolve",
    "resolvent_kernel",
    "SpectralDomain",
    "SpectralVector",
    "interval_domain",
    "rectangle_domain",
    "SystemParams",
    "free_evolution",
    "FirstOrderProblem",
    "SecondOrderSystem",
    "maccamy_transform",
    "ControlBasis",
    "ControlSignal",
]
