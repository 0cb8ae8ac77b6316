"""
Figures for Inflect runs

Saved to PNG with the non-interactive Agg backend so the CLI and tests can
run headless.
"""
from pathlib import Path

import matplotlib
matplotlib.use('Agg')  # Non-interactive backend
import matplotlib.pyplot as plt
import numpy as np


def plot_pitch_over_mel(melspec, track, path, sample_rate, fmax=None, title=None):
    """
    Log-mel spectrogram with the F0 contour drawn on a secondary Hz axis

    Unvoiced frames are left as gaps in the contour.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    times = track.times

    fig, ax = plt.subplots(figsize=(8, 3.5))
    ax.imshow(melspec.T, origin='lower', aspect='auto', cmap='magma',
              extent=[0, max(times[-1], track.hop_seconds) if len(times) else 1, 0, melspec.shape[1]])
    ax.set_xlabel('Time (s)')
    ax.set_ylabel('Mel band')

    ax_f0 = ax.twinx()
    f0 = np.where(track.voiced, track.f0, np.nan)
    ax_f0.plot(times, f0, 'c-', linewidth=2, label='F0')
    ax_f0.set_ylabel('F0 (Hz)')
    top = fmax or 500.0
    if fmax is None and np.any(track.voiced):
        top = max(top, float(np.nanmax(f0)) * 1.1)
    ax_f0.set_ylim(0, top)
    ax_f0.legend(loc='upper left')

    ax.set_title(title or 'Mel spectrogram with F0 contour')
    fig.savefig(path, dpi=100, bbox_inches='tight')
    plt.close(fig)
    return path


def plot_history(history, path):
    """Training loss and accuracy per epoch"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    epochs = np.arange(1, len(history.loss) + 1)

    fig, (ax_loss, ax_acc) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax_loss.plot(epochs, history.loss, 'r-')
    ax_loss.set_xlabel('Epoch')
    ax_loss.set_ylabel('Weighted CE')
    ax_loss.set_title('Training loss')
    ax_loss.grid(True)

    ax_acc.plot(epochs, history.accuracy, 'b-')
    ax_acc.axhline(y=1.0, color='g', linestyle='--')
    ax_acc.set_ylim([0, 1.05])
    ax_acc.set_xlabel('Epoch')
    ax_acc.set_ylabel('Accuracy')
    ax_acc.set_title('Training accuracy')
    ax_acc.grid(True)

    fig.savefig(path, dpi=100, bbox_inches='tight')
    plt.close(fig)
    return path
