"""
Finite-difference checks of analytic gradients, and parameter fingerprints.
"""

import bisect
import hashlib
import itertools
import logging
from dataclasses import dataclass

import torch

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GradientSample:
    name: str
    index: int
    analytic: float
    numeric: float

    @property
    def relative_error(self) -> float:
        # Gradients below 1e-6 are compared on an absolute scale.
        scale = max(abs(self.analytic), abs(self.numeric), 1e-6)
        return abs(self.analytic - self.numeric) / scale


def check_gradients(loss_fn, parameters, n_samples: int = 200, eps: float = 1e-6, generator=None):
    """
    Compare autograd against central differences at random parameter entries.

    Entries are drawn uniformly over all scalars of *parameters*. Run in
    double precision with dropout disabled for meaningful results.

    Args:
        loss_fn: zero-argument callable returning a scalar tensor
        parameters: iterable of ``(name, tensor)`` pairs, e.g. ``model.named_parameters()``
        n_samples: number of entries to check
        eps: finite-difference step
        generator: ``torch.Generator`` choosing the checked entries

    Returns:
        list of GradientSample
    """
    named = [(name, p) for name, p in parameters if p.requires_grad]
    for _, p in named:
        p.grad = None
    loss_fn().backward()
    analytic = {name: (p.grad.detach().clone() if p.grad is not None else torch.zeros_like(p)) for name, p in named}

    sizes = [p.numel() for _, p in named]
    offsets = [0, *itertools.accumulate(sizes)][:-1]
    picks = torch.randint(sum(sizes), (n_samples,), generator=generator)

    samples = []
    with torch.no_grad():
        for flat in picks.tolist():
            which = bisect.bisect_right(offsets, flat) - 1
            name, p = named[which]
            index = flat - offsets[which]
            view = p.view(-1)
            original = view[index].item()
            view[index] = original + eps
            loss_plus = loss_fn().item()
            view[index] = original - eps
            loss_minus = loss_fn().item()
            view[index] = original
            samples.append(GradientSample(
                name=name,
                index=index,
                analytic=analytic[name].view(-1)[index].item(),
                numeric=(loss_plus - loss_minus) / (2 * eps),
            ))

    worst = max(samples, key=lambda sample: sample.relative_error, default=None)
    if worst is not None:
        logger.debug("Worst gradient sample: %s[%d] relative error %.3g", worst.name, worst.index, worst.relative_error)
    return samples


def parameter_fingerprint(model) -> str:
    """SHA-256 over parameter names, shapes and bytes in state-dict order."""
    digest = hashlib.sha256()
    for name, tensor in model.state_dict().items():
        tensor = tensor.detach().cpu().contiguous()
        digest.update(name.encode("utf-8"))
        digest.update(str(tuple(tensor.shape)).encode("utf-8"))
        digest.update(tensor.numpy().tobytes())
    return digest.hexdigest()
