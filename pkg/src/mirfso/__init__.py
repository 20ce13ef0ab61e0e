"""Mid-infrared free-space optical link modelling.

Submodules
----------
channel_model
    Atmospheric and geometric attenuation versus distance.
link_model
    SNR/BER/PER chain, attenuation budgets and noise regimes.
codec
    Packet framing, Manchester coding and PER counting.
simkit
    Bit-true Monte Carlo of the receiver chain.
cli_io
    Configuration files and the ``mirfso`` command line.
"""

__version__ = "0.1.0"
