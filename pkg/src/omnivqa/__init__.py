"""Quality assessment tools for omnidirectional (360-degree) video.

Modules
-------
sphere      viewing directions, head poses and viewports
projection  ERP / RCMP / TSP / CPP pixel <-> sphere maps and resampling
media_io    raw planar 4:2:0 video and OVWM weight-map files
traces      head/eye movement traces and their alignment to frames
weights     I-HM, O-HM and I-EM weight maps, behavior statistics
metrics     PSNR family, SSIM and behavior-weighted PSNR
subjective  MOS/DMOS, subject screening, logistic fitting, correlations
percmodel   patch-based learned quality model
cli         the ``omnivqa`` command
"""

__version__ = "0.1.0"
