// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

namespace moyolo {

/// Registers an OpenCV-backed loader for JPEG/PNG frames. Returns false when
/// the library was built without OpenCV.
bool install_opencv_loader();

}  // namespace moyolo
