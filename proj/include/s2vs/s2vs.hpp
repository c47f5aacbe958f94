#pragma once

#include "s2vs/augment.hpp"
#include "s2vs/backbone.hpp"
#include "s2vs/common.hpp"
#include "s2vs/config.hpp"
#include "s2vs/errors.hpp"
#include "s2vs/eval.hpp"
#include "s2vs/features.hpp"
#include "s2vs/image.hpp"
#include "s2vs/losses.hpp"
#include "s2vs/model.hpp"
#include "s2vs/synthetic.hpp"
#include "s2vs/trainer.hpp"
#include "s2vs/video.hpp"
