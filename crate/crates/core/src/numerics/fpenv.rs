//! Scoped control of subnormal floating-point handling.
//!
//! Training drives many sigmoid outputs and Adam moments toward zero, and
//! arithmetic on subnormal values is an order of magnitude slower on x86.
//! [`FlushSubnormals`] treats them as zero for as long as it is alive.

/// While alive, subnormal inputs and results on the current thread are
/// replaced by zero. The previous mode is restored on drop. A no-op on
/// targets other than x86-64.
#[must_use = "the mode is reset when the guard is dropped"]
#[derive(Debug)]
pub struct FlushSubnormals {
    #[cfg(target_arch = "x86_64")]
    saved: u32,
}

#[cfg(target_arch = "x86_64")]
mod imp {
    use std::arch::asm;

    /// MXCSR flush-to-zero (bit 15) and denormals-are-zero (bit 6).
    pub const FTZ_DAZ: u32 = 0x8040;

    pub fn read() -> u32 {
        let mut csr = 0u32;
        // SAFETY: stmxcsr stores the 32-bit control register into `csr`;
        // SSE is part of the x86-64 baseline.
        unsafe { asm!("stmxcsr [{}]", in(reg) &mut csr, options(nostack, preserves_flags)) };
        csr
    }

    pub fn write(csr: u32) {
        // SAFETY: only rounding/flush bits taken from a value previously
        // read from the register are ever written back.
        unsafe { asm!("ldmxcsr [{}]", in(reg) &csr, options(nostack, readonly, preserves_flags)) };
    }
}

impl FlushSubnormals {
    pub fn enable() -> Self {
        #[cfg(target_arch = "x86_64")]
        {
            let saved = imp::read();
            imp::write(saved | imp::FTZ_DAZ);
            FlushSubnormals { saved }
        }
        #[cfg(not(target_arch = "x86_64"))]
        FlushSubnormals {}
    }
}

impl Drop for FlushSubnormals {
    fn drop(&mut self) {
        #[cfg(target_arch = "x86_64")]
        imp::write(self.saved);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    #[cfg(target_arch = "x86_64")]
    fn flushes_and_restores() {
        let tiny = std::hint::black_box(f32::MIN_POSITIVE);
        let half = std::hint::black_box(0.5f32);
        assert!((tiny * half) > 0.0);
        {
            let _guard = FlushSubnormals::enable();
            assert_eq!(std::hint::black_box(tiny) * std::hint::black_box(half), 0.0);
        }
        assert!((tiny * half) > 0.0);
    }
}
