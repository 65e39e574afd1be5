"""The four case studies: flying base station, mobile relay, energy transfer, caching."""
