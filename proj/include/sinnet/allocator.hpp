#pragma once

namespace sinnet {

/// Keeps large temporaries (weight-sized matrices) on the heap instead of
/// letting glibc map and unmap them on every training step. A no-op on
/// other C libraries. Call once at program start.
void tune_allocator();

}  // namespace sinnet
