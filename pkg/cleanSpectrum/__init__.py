# cleanSpectrum package marker
