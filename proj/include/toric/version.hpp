#pragma once

#define TORIC_SPECTRA_VERSION "0.1.0"

namespace toric {
inline const char* version() { return TORIC_SPECTRA_VERSION; }
}
